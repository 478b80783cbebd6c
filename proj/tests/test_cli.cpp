#include "helpers.hpp"
#include "ksim/cli.hpp"
#include "ksim/imgio.hpp"
#include "ksim/masks.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ksim;

namespace {

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> const &args)
{
  std::ostringstream out, err;
  int const code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(std::filesystem::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("phantom and metrics on identical inputs")
{
  test::TempDir dir("cli");
  auto const p = (dir.path() / "p.pgm").string();
  auto const r = run({"phantom", "--kind", "shepp-logan", "--size", "64", "--out", p});
  CHECK(r.code == 0);
  CHECK(r.out.find("wrote=") == 0);
  auto const slice = imgio::read_slice(p);
  CHECK(slice.height == 64);

  auto const m = run({"metrics", "--ref", p, "--test", p});
  CHECK(m.code == 0);
  CHECK(m.out.find("mse=0 ") != std::string::npos);
  CHECK(m.out.find("psnr=inf ") != std::string::npos);
  CHECK(m.out.find("ssim=1 ") != std::string::npos);
  CHECK(m.out.find("ssim_mode=global") != std::string::npos);
  CHECK(run({"metrics", "--ref", p, "--test", p, "--ssim-mode", "windowed"}).out.find("ssim=1 ") != std::string::npos);
}

TEST_CASE("exit codes")
{
  test::TempDir dir("cli");
  auto const m = (dir.path() / "m.pbm").string();
  auto const below = run({"gen-mask", "--pattern", "fastmri", "--size", "320", "--accel", "32", "--out", m});
  CHECK(below.code == 2);
  CHECK(below.err.find("FractionBelowCenter") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(m));

  CHECK(run({"gen-mask", "--pattern", "radial", "--bogus", "1", "--out", m}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"gen-mask", "--pattern", "radial", "--size", "32", "--out", m}).code == 1);
  CHECK(run({"gen-mask", "--pattern", "radial", "--size", "32", "--accel", "4", "--fraction", "0.25", "--out", m})
          .code == 1);
  auto const missing = run({"metrics", "--ref", (dir.path() / "nope.pgm").string(), "--test", m});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("IoError") != std::string::npos);
  CHECK(run({"gen-mask", "--pattern", "zigzag", "--size", "32", "--accel", "4", "--out", m}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("gen-mask is deterministic and accel matches fraction")
{
  test::TempDir dir("cli");
  auto const a = dir.path() / "a.pbm";
  auto const b = dir.path() / "b.pbm";
  REQUIRE(run({"gen-mask", "--pattern", "radial", "--size", "320", "--accel", "16", "--out", a.string()}).code == 0);
  REQUIRE(run({"gen-mask", "--pattern", "radial", "--size", "320", "--accel", "16", "--out", b.string()}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(masks::sidecar_path(a)) == slurp(masks::sidecar_path(b)));
  auto const mask = masks::read_mask(a);
  CHECK(mask.popcount() == 6400);
  CHECK(mask.meta.pattern == masks::Pattern::radial);

  for (unsigned k : {2u, 4u, 8u, 16u, 32u, 64u}) {
    for (std::string pattern : {"fastmri", "radial", "spiral"}) {
      auto const x = dir.path() / "x.pbm";
      auto const y = dir.path() / "y.pbm";
      auto const rx = run({"gen-mask", "--pattern", pattern, "--size", "64", "--accel", std::to_string(k), "--out", x.string()});
      auto const ry =
        run({"gen-mask", "--pattern", pattern, "--size", "64", "--fraction", "1/" + std::to_string(k), "--out", y.string()});
      CHECK(rx.code == ry.code);
      if (rx.code == 0) {
        CHECK(slurp(x) == slurp(y));
        CHECK(slurp(masks::sidecar_path(x)) == slurp(masks::sidecar_path(y)));
      }
    }
  }
  CHECK(cli::parse_fraction("1/4") == 0.25);
  CHECK(cli::parse_fraction("0.125") == 0.125);
}

TEST_CASE("degrade and normalize subcommands")
{
  test::TempDir dir("cli");
  auto const p = (dir.path() / "p.ksim").string();
  auto const bm = (dir.path() / "bm.ksim").string();
  auto const m = (dir.path() / "m.pbm").string();
  auto const d = (dir.path() / "d.ksim").string();
  REQUIRE(run({"phantom", "--kind", "shepp_logan", "--size", "64", "--out", p}).code == 0);
  REQUIRE(run({"phantom", "--kind", "bimodal-field", "--size", "64", "--out", bm}).code == 0);
  REQUIRE(run({"gen-mask", "--pattern", "spiral", "--size", "64", "--accel", "4", "--out", m}).code == 0);

  auto const r = run({"degrade", "--in", p, "--mask", m, "--path", "undersample", "--out", d});
  CHECK(r.code == 0);
  auto const degraded = imgio::read_slice(d);
  CHECK(degraded.height == 64);
  CHECK_FALSE(degraded == imgio::read_slice(p));

  auto const lr = run({"degrade", "--in", p, "--path", "lowres", "--downscale", "2", "--out", d});
  CHECK(lr.code == 0);
  CHECK(imgio::read_slice(d).width == 32);
  CHECK(run({"degrade", "--in", p, "--path", "undersample", "--out", d}).code == 2);

  auto const h = run({"normalize", "--method", "histogram", "--in", bm, "--out", d});
  CHECK(h.code == 0);
  CHECK(h.out.find("fallback=false") != std::string::npos);
  auto const ramp = (dir.path() / "ramp.ksim").string();
  REQUIRE(run({"phantom", "--kind", "ramp", "--size", "32", "--out", ramp}).code == 0);
  auto const f = run({"normalize", "--method", "histogram", "--in", ramp, "--out", d});
  CHECK(f.code == 0);
  CHECK(f.out.find("fallback=true") != std::string::npos);

  auto const flat = (dir.path() / "flat.ksim").string();
  imgio::write_slice(Slice(16, 16, 0.5), flat, imgio::Format::ksim);
  auto const deg = run({"normalize", "--method", "percentile", "--in", flat, "--out", d});
  CHECK(deg.code == 2);
  CHECK(deg.err.find("DegenerateRange") != std::string::npos);
}

TEST_CASE("bench subcommand")
{
  test::TempDir dir("cli");
  auto const cfg = dir.path() / "c.json";
  std::ofstream(cfg) << R"({"corpus": {"phantom": "shepp_logan", "size": 32}, "patterns": ["radial"],
                            "accelerations": [2, 4]})";
  auto const stdout_run = run({"bench", "--config", cfg.string(), "--threads", "1"});
  CHECK(stdout_run.code == 0);
  CHECK(stdout_run.out.find("pattern,fraction,total_acceleration,path,metric,mean,std,n") != std::string::npos);

  auto const csv = dir.path() / "out.csv";
  auto const file_run = run({"bench", "--config", cfg.string(), "--out", csv.string()});
  CHECK(file_run.code == 0);
  CHECK(slurp(csv) == stdout_run.out);

  auto const cmp = run({"bench", "--config", cfg.string(), "--compare-normalizations"});
  CHECK(cmp.code == 0);
  CHECK(cmp.out.find("normalization,pattern") != std::string::npos);

  std::ofstream(cfg) << R"({"corpus": {"phantom": "shepp_logan"}, "accelerations": [3]})";
  CHECK(run({"bench", "--config", cfg.string()}).code == 2);
  CHECK(run({"bench"}).code == 1);
}
