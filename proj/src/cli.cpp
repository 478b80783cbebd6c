#include "ksim/cli.hpp"
#include "ksim/bench.hpp"
#include "ksim/imgio.hpp"
#include "ksim/masks.hpp"
#include "ksim/metrics.hpp"
#include "ksim/normalize.hpp"
#include "ksim/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace ksim::cli {

namespace fs = std::filesystem;
using metrics::format_exact;

namespace {

imgio::Format output_format(fs::path const &path)
{
  return path.extension() == ".ksim" ? imgio::Format::ksim : imgio::Format::pgm16;
}

struct PhantomArgs
{
  std::string kind;
  std::size_t size = 320;
  std::string out;
};

struct MaskArgs
{
  std::string pattern;
  std::optional<std::size_t> size, height, width;
  std::optional<unsigned> accel;
  std::optional<std::string> fraction;
  std::uint64_t seed = 0;
  double center_fraction = masks::kDefaultCenterFraction;
  double angle_offset = 0.0;
  std::size_t arms = 1;
  std::string out;
};

struct DegradeArgs
{
  std::string in, mask, out;
  std::string path = "undersample";
  unsigned downscale = 1;
  std::string recon = "zero_filled";
  std::string downscale_method = "kspace";
};

struct MetricsArgs
{
  std::string ref, test;
  std::string ssim_mode = "global";
  double max_value = 1.0;
};

struct NormalizeArgs
{
  std::string method = "percentile";
  std::string in, out;
  double p_lo = 2.0, p_hi = 98.0;
  double alpha = 5.0;
  int degree = 15;
  std::size_t bins = 256;
};

struct BenchArgs
{
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool compare = false;
};

int do_phantom(PhantomArgs const &a, std::ostream &out)
{
  auto const kind = imgio::parse_phantom(a.kind);
  auto const s = imgio::make_phantom(kind, a.size);
  imgio::write_slice(s, a.out, output_format(a.out));
  out << "wrote=" << a.out << " kind=" << imgio::to_string(kind) << " size=" << a.size << "\n";
  return ok;
}

int do_gen_mask(MaskArgs const &a, std::ostream &out)
{
  std::size_t const h = a.height.value_or(a.size.value_or(0));
  std::size_t const w = a.width.value_or(a.size.value_or(0));
  if (h == 0 || w == 0) { throw CLI::ValidationError("gen-mask", "--size or --height/--width required"); }
  double const fraction = a.accel ? masks::accel_to_fraction(*a.accel) : parse_fraction(*a.fraction);
  masks::MaskOptions const opts{a.seed, a.center_fraction, a.angle_offset, a.arms};
  auto const mask = masks::make_mask(masks::parse_pattern(a.pattern), h, w, fraction, opts);
  masks::write_mask(mask, a.out);
  out << "wrote=" << a.out << " pattern=" << masks::to_string(mask.meta.pattern) << " popcount=" << mask.popcount()
      << " achieved_fraction=" << format_exact(mask.meta.achieved_fraction) << "\n";
  return ok;
}

int do_degrade(DegradeArgs const &a, std::ostream &out)
{
  auto const src = imgio::read_slice(a.in);
  pipeline::DegradeSpec spec;
  spec.path = pipeline::parse_path(a.path);
  spec.downscale = a.downscale;
  spec.recon = pipeline::parse_recon(a.recon);
  spec.downscale_method = pipeline::parse_downscale_method(a.downscale_method);
  if (!a.mask.empty()) { spec.mask = masks::read_mask(a.mask); }
  auto const result = pipeline::degrade(src, spec);
  imgio::write_slice(result, a.out, output_format(a.out));
  out << "wrote=" << a.out << " height=" << result.height << " width=" << result.width
      << " total_acceleration=" << spec.total_acceleration() << "\n";
  return ok;
}

int do_metrics(MetricsArgs const &a, std::ostream &out)
{
  auto const ref = imgio::read_slice(a.ref);
  auto const test = imgio::read_slice(a.test);
  metrics::SsimParams p;
  p.mode = metrics::parse_ssim_mode(a.ssim_mode);
  auto const r = metrics::evaluate(ref, test, p, a.max_value);
  out << "mse=" << format_exact(r.mse) << " psnr=" << format_exact(r.psnr) << " ssim=" << format_exact(r.ssim)
      << " ssim_mode=" << metrics::to_string(p.mode) << "\n";
  return ok;
}

int do_normalize(NormalizeArgs const &a, std::ostream &out)
{
  auto const src = imgio::read_slice(a.in);
  if (a.method == "percentile") {
    imgio::write_slice(normalize::normalize_percentile(src, a.p_lo, a.p_hi), a.out, output_format(a.out));
    out << "method=percentile fallback=false wrote=" << a.out << "\n";
    return ok;
  }
  if (a.method != "histogram") { throw Error(errc::InvalidArgument, "unknown method '" + a.method + "'"); }
  normalize::HistogramNormParams params;
  params.alpha = a.alpha;
  params.poly_degree = a.degree;
  params.bin_count = a.bins;
  auto const r = normalize::normalize_histogram(src, params);
  imgio::write_slice(r.slice, a.out, output_format(a.out));
  out << "method=histogram fallback=" << (r.fallback ? "true" : "false");
  if (!r.fallback) {
    out << " m=" << format_exact(r.params.m_intensity) << " M=" << format_exact(r.params.M_intensity)
        << " w=" << format_exact(r.params.width) << " alpha=" << format_exact(r.params.alpha);
  }
  out << " wrote=" << a.out << "\n";
  return ok;
}

int do_bench(BenchArgs const &a, std::ostream &out)
{
  auto config = bench::load_config(a.config);
  if (a.out) { config.output = *a.out; }
  if (a.threads) { config.threads = *a.threads; }

  std::string csv;
  std::string summary;
  if (a.compare) {
    auto const corpus = bench::load_corpus(config.corpus);
    auto const arms = bench::compare_normalizations(config, corpus);
    csv = bench::comparison_csv(config, arms);
    summary = "arms=" + std::to_string(arms.size());
    if (config.output) {
      imgio::write_file(*config.output, std::vector<std::uint8_t>(csv.begin(), csv.end()));
    }
  } else {
    auto const r = bench::run_bench(config);
    csv = r.csv;
    summary = "rows=" + std::to_string(r.rows.size()) + " slices_read=" + std::to_string(r.slices_read) +
              " slices_skipped=" + std::to_string(r.slices_skipped);
  }
  if (config.output) {
    out << "wrote=" << config.output->string() << " " << summary << "\n";
  } else {
    out << csv;
  }
  return ok;
}

} // namespace

double parse_fraction(std::string const &text)
{
  try {
    std::size_t used = 0;
    if (auto const slash = text.find('/'); slash != std::string::npos) {
      double const num = std::stod(text.substr(0, slash), &used);
      if (used != slash) { throw std::invalid_argument(text); }
      std::string const den_text = text.substr(slash + 1);
      double const den = std::stod(den_text, &used);
      if (used != den_text.size() || den == 0.0) { throw std::invalid_argument(text); }
      return num / den;
    }
    double const v = std::stod(text, &used);
    if (used != text.size()) { throw std::invalid_argument(text); }
    return v;
  } catch (std::logic_error const &) {
    throw Error(errc::InvalidArgument, "cannot parse fraction '" + text + "'");
  }
}

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"k-space undersampling simulation toolkit", "ksim"};
  app.require_subcommand(1);

  PhantomArgs phantom;
  auto *ph = app.add_subcommand("phantom", "Write a synthetic test slice");
  ph->add_option("--kind", phantom.kind, "shepp-logan | bimodal-field | ramp")->required();
  ph->add_option("--size", phantom.size, "Edge length in pixels");
  ph->add_option("--out", phantom.out, "Output .pgm (16-bit) or .ksim")->required();

  MaskArgs mask;
  auto *gm = app.add_subcommand("gen-mask", "Generate a sampling mask (PBM + JSON sidecar)");
  gm->add_option("--pattern", mask.pattern, "fastmri | radial | spiral")->required();
  gm->add_option("--size", mask.size, "Square mask edge length");
  gm->add_option("--height", mask.height);
  gm->add_option("--width", mask.width);
  auto *acc = gm->add_option("--accel", mask.accel, "Acceleration factor k (fraction 1/k)");
  auto *frac = gm->add_option("--fraction", mask.fraction, "Fraction of k-space, e.g. 0.25 or 1/4");
  acc->excludes(frac);
  frac->excludes(acc);
  gm->add_option("--seed", mask.seed);
  gm->add_option("--center-fraction", mask.center_fraction);
  gm->add_option("--angle-offset", mask.angle_offset, "Radial spoke offset in radians");
  gm->add_option("--arms", mask.arms, "Spiral arm count");
  gm->add_option("--out", mask.out, "Output .pbm")->required();

  DegradeArgs deg;
  auto *dg = app.add_subcommand("degrade", "Apply one acquisition path to a slice");
  dg->add_option("--in", deg.in)->required();
  dg->add_option("--mask", deg.mask, "Mask .pbm (undersample/combined)");
  dg->add_option("--path", deg.path, "undersample | lowres | combined");
  dg->add_option("--downscale", deg.downscale);
  dg->add_option("--recon", deg.recon, "none | zero_filled | zero_filled_plus_bicubic");
  dg->add_option("--downscale-method", deg.downscale_method, "kspace | bicubic");
  dg->add_option("--out", deg.out)->required();

  MetricsArgs met;
  auto *mt = app.add_subcommand("metrics", "Compare two slices (MSE, PSNR, SSIM)");
  mt->add_option("--ref", met.ref)->required();
  mt->add_option("--test", met.test)->required();
  mt->add_option("--ssim-mode", met.ssim_mode, "global | windowed");
  mt->add_option("--max-value", met.max_value);

  NormalizeArgs norm;
  auto *nm = app.add_subcommand("normalize", "Intensity-normalize a slice");
  nm->add_option("--method", norm.method, "percentile | histogram");
  nm->add_option("--in", norm.in)->required();
  nm->add_option("--out", norm.out)->required();
  nm->add_option("--p-lo", norm.p_lo);
  nm->add_option("--p-hi", norm.p_hi);
  nm->add_option("--alpha", norm.alpha);
  nm->add_option("--degree", norm.degree);
  nm->add_option("--bins", norm.bins);

  BenchArgs bn;
  auto *bc = app.add_subcommand("bench", "Run a degradation sweep from a JSON config");
  bc->add_option("--config", bn.config)->required();
  bc->add_option("--out", bn.out, "CSV path (overrides config.output)");
  bc->add_option("--threads", bn.threads);
  bc->add_flag("--compare-normalizations", bn.compare, "Run percentile and histogram arms side by side");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (ph->parsed()) { return do_phantom(phantom, out); }
    if (gm->parsed()) {
      if (!mask.accel && !mask.fraction) {
        err << "gen-mask: one of --accel or --fraction is required\n" << gm->help();
        return usage;
      }
      return do_gen_mask(mask, out);
    }
    if (dg->parsed()) { return do_degrade(deg, out); }
    if (mt->parsed()) { return do_metrics(met, out); }
    if (nm->parsed()) { return do_normalize(norm, out); }
    if (bc->parsed()) { return do_bench(bn, out); }
  } catch (CLI::ValidationError const &e) {
    err << e.what() << "\n";
    return usage;
  } catch (Error const &e) {
    err << "error: " << e.what() << "\n";
    return failure;
  } catch (std::exception const &e) {
    err << "error: RuntimeError: " << e.what() << "\n";
    return failure;
  }
  return usage;
}

int run(int argc, char **argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

} // namespace ksim::cli
