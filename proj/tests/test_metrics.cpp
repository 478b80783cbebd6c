#include "helpers.hpp"
#include "ksim/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace ksim;
using namespace ksim::metrics;

namespace {

std::string kind_of(auto &&fn)
{
  try {
    fn();
  } catch (Error const &e) {
    return e.kind();
  }
  return "none";
}

// Naive two-loop oracles written straight from the textbook formulas.
double naive_mse(Slice const &x, Slice const &y)
{
  double acc = 0.0;
  for (std::size_t r = 0; r < x.height; ++r) {
    for (std::size_t c = 0; c < x.width; ++c) {
      double const d = x(r, c) - y(r, c);
      acc += d * d;
    }
  }
  return acc / double(x.height * x.width);
}

double naive_ssim(Slice const &x, Slice const &y, double k1 = 0.01, double k2 = 0.03, double L = 1.0)
{
  double const n = double(x.height * x.width);
  double mx = 0.0, my = 0.0;
  for (std::size_t r = 0; r < x.height; ++r) {
    for (std::size_t c = 0; c < x.width; ++c) {
      mx += x(r, c) / n;
      my += y(r, c) / n;
    }
  }
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t r = 0; r < x.height; ++r) {
    for (std::size_t c = 0; c < x.width; ++c) {
      sxx += (x(r, c) - mx) * (x(r, c) - mx) / n;
      syy += (y(r, c) - my) * (y(r, c) - my) / n;
      sxy += (x(r, c) - mx) * (y(r, c) - my) / n;
    }
  }
  double const c1 = (k1 * L) * (k1 * L), c2 = (k2 * L) * (k2 * L);
  return (2 * mx * my + c1) * (2 * sxy + c2) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
}

Slice noisy_copy(Slice const &x, double sigma, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Slice y = x;
  for (auto &v : y.values) {
    v = std::clamp(v + g(rng), 0.0, 1.0);
  }
  return y;
}

} // namespace

TEST_CASE("mse and psnr against the naive oracle")
{
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto const x = test::random_slice(32, 32, 2 * seed);
    auto const y = test::random_slice(32, 32, 2 * seed + 1);
    double const m = mse(x, y);
    CHECK(std::abs(m - naive_mse(x, y)) <= 1e-12);
    CHECK(std::abs(psnr(x, y) - 10.0 * std::log10(1.0 / naive_mse(x, y))) <= 1e-12);
    CHECK(mse(x, y) == mse(y, x));
  }
  auto const x = test::random_slice(16, 16, 7);
  auto y = x;
  for (auto &v : y.values) {
    v += 0.1;
  }
  CHECK(mse(x, y) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(mse(x, x) == 0.0);
  CHECK(psnr(x, x) == kInf);
  CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(psnr_from_mse(1e-4) == doctest::Approx(40.0).epsilon(1e-14));
  CHECK(psnr_from_mse(0.01, 255.0) == doctest::Approx(20.0 + 20.0 * std::log10(255.0)));
  CHECK(psnr_from_mse(0.02) < psnr_from_mse(0.01));
  CHECK(kind_of([&] { mse(x, Slice(16, 15)); }) == errc::DimensionMismatch);
}

TEST_CASE("global ssim against the naive oracle")
{
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto const x = test::random_slice(32, 32, 3 * seed);
    auto const y = noisy_copy(x, 0.05 + 0.002 * double(seed), seed);
    double const s = ssim(x, y);
    CHECK(std::abs(s - naive_ssim(x, y)) <= 1e-12);
    CHECK(std::abs(s - ssim(y, x)) <= 1e-15);
    CHECK(s < 1.0);
  }
  SsimParams p;
  p.k1 = 0.02;
  p.L = 2.0;
  auto const x = test::random_slice(20, 24, 11);
  auto const y = test::random_slice(20, 24, 12);
  CHECK(std::abs(ssim(x, y, p) - naive_ssim(x, y, 0.02, 0.03, 2.0)) <= 1e-12);
  CHECK(p.c1() == doctest::Approx(0.0016));
  CHECK(p.c2() == doctest::Approx(0.0036));
}

TEST_CASE("ssim of an image with itself is exactly one")
{
  auto const x = test::random_slice(40, 36, 5);
  CHECK(ssim(x, x) == 1.0);
  SsimParams w;
  w.mode = SsimMode::windowed;
  CHECK(ssim(x, x, w) == 1.0);
  w.window = WindowKind::uniform;
  w.window_size = 7;
  CHECK(ssim(x, x, w) == 1.0);
  CHECK(ssim(Slice(12, 12, 0.3), Slice(12, 12, 0.3), w) == 1.0);
}

TEST_CASE("uniform window spanning the image equals global ssim")
{
  for (std::size_t n : {11u, 15u, 31u}) {
    auto const x = test::random_slice(n, n, n);
    auto const y = noisy_copy(x, 0.1, n + 1);
    SsimParams w;
    w.mode = SsimMode::windowed;
    w.window = WindowKind::uniform;
    w.window_size = n;
    CHECK(std::abs(ssim(x, y, w) - ssim(x, y)) <= 1e-12);
  }
}

TEST_CASE("windowed ssim properties")
{
  auto const x = test::random_slice(48, 40, 21);
  auto const y = noisy_copy(x, 0.08, 22);
  auto const z = noisy_copy(x, 0.25, 23);
  SsimParams w;
  w.mode = SsimMode::windowed;
  double const sy = ssim(x, y, w), sz = ssim(x, z, w);
  CHECK(std::abs(sy - ssim(y, x, w)) <= 1e-15);
  CHECK(sy < 1.0);
  CHECK(sz < sy);
  CHECK(ssim(x, y, w) == sy);

  CHECK(kind_of([&] {
          SsimParams q = w;
          q.window_size = 10;
          ssim(x, y, q);
        }) == errc::InvalidArgument);
  CHECK(kind_of([&] { ssim(Slice(8, 8, 0.1), Slice(8, 8, 0.2), w); }) == errc::DimensionMismatch);
  CHECK(parse_ssim_mode("windowed") == SsimMode::windowed);
  CHECK(kind_of([] { parse_ssim_mode("local"); }) == errc::InvalidArgument);
}

TEST_CASE("global ssim is invariant under a shared pixel permutation")
{
  auto const x = test::random_slice(24, 24, 31);
  auto const y = noisy_copy(x, 0.1, 32);
  std::vector<std::size_t> perm(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    perm[i] = i;
  }
  std::mt19937_64 rng(33);
  std::shuffle(perm.begin(), perm.end(), rng);
  Slice px(24, 24), py(24, 24);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    px.values[i] = x.values[perm[i]];
    py.values[i] = y.values[perm[i]];
  }
  CHECK(ssim(px, py) == doctest::Approx(ssim(x, y)).epsilon(1e-12));
  CHECK(mse(px, py) == doctest::Approx(mse(x, y)).epsilon(1e-12));
}

TEST_CASE("evaluate bundles the three metrics")
{
  auto const x = test::random_slice(16, 16, 41);
  auto const y = noisy_copy(x, 0.1, 42);
  auto const r = evaluate(x, y);
  CHECK(r.mse == mse(x, y));
  CHECK(r.psnr == psnr(x, y));
  CHECK(r.ssim == ssim(x, y));
  auto const same = evaluate(x, x);
  CHECK(same.mse == 0.0);
  CHECK(same.psnr == kInf);
  CHECK(same.ssim == 1.0);
}

TEST_CASE("aggregate and rendering")
{
  std::vector<double> const ones{1, 1, 1};
  auto a = aggregate(ones);
  CHECK(a.mean == 1.0);
  CHECK(a.std == 0.0);
  CHECK(a.n == 3);
  std::vector<double> const pair{0, 2};
  a = aggregate(pair);
  CHECK(a.mean == 1.0);
  CHECK(a.std == 1.0);

  std::vector<double> const infs{kInf, kInf};
  a = aggregate(infs);
  CHECK(a.mean == kInf);
  CHECK(a.std == 0.0);
  std::vector<double> const mixed{kInf, 30.0};
  a = aggregate(mixed);
  CHECK(a.mean == kInf);
  CHECK(std::isnan(a.std));
  CHECK(kind_of([] { aggregate(std::vector<double>{}); }) == errc::EmptyInput);

  CHECK(render_value(0.001439, ScaleHint::mse_e4) == "14.39");
  CHECK(render_value(0.8712, ScaleHint::ssim_e2) == "87.12");
  CHECK(render_value(31.456, ScaleHint::raw) == "31.46");
  CHECK(render_value(kInf, ScaleHint::raw) == "inf");
  CHECK(render(Aggregate{0.001439, 0.0005, 10}, ScaleHint::mse_e4) == "14.39 ± 5.00");

  CHECK(format_exact(0.1) == "0.10000000000000001");
  CHECK(format_exact(kInf) == "inf");
  CHECK(format_exact(std::nan("")) == "nan");
  CHECK(std::stod(format_exact(1.0 / 3.0)) == 1.0 / 3.0);
}
