#include "helpers.hpp"
#include "ksim/fourier.hpp"
#include "ksim/imgio.hpp"
#include "ksim/metrics.hpp"
#include "ksim/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace ksim;
using namespace ksim::pipeline;
using ksim::test::max_abs_diff;

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

// Positive image whose spectrum only contains the listed integer frequencies.
Slice cosine_image(std::size_t n, std::vector<std::tuple<int, int, double>> const &terms)
{
  Slice s(n, n, 0.5);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      for (auto const &[fr, fc, amp] : terms) {
        s(r, c) += amp * std::cos(2.0 * std::numbers::pi * (fr * double(r) + fc * double(c)) / double(n) + 0.3);
      }
    }
  }
  return s;
}

// Direct per-pixel Catmull-Rom evaluation over the 4x4 neighbourhood.
Slice bicubic_oracle(Slice const &in, std::size_t oh, std::size_t ow)
{
  auto kernel = [](double t) {
    t = std::abs(t);
    if (t < 1) { return 1.5 * t * t * t - 2.5 * t * t + 1; }
    if (t < 2) { return -0.5 * t * t * t + 2.5 * t * t - 4 * t + 2; }
    return 0.0;
  };
  Slice out(oh, ow);
  for (std::size_t i = 0; i < oh; ++i) {
    double const sy = (i + 0.5) * double(in.height) / double(oh) - 0.5;
    for (std::size_t j = 0; j < ow; ++j) {
      double const sx = (j + 0.5) * double(in.width) / double(ow) - 0.5;
      double acc = 0.0;
      for (long m = long(std::floor(sy)) - 1; m <= long(std::floor(sy)) + 2; ++m) {
        for (long n = long(std::floor(sx)) - 1; n <= long(std::floor(sx)) + 2; ++n) {
          long const mm = std::clamp(m, 0L, long(in.height) - 1);
          long const nn = std::clamp(n, 0L, long(in.width) - 1);
          acc += kernel(sy - double(m)) * kernel(sx - double(n)) * in(std::size_t(mm), std::size_t(nn));
        }
      }
      out(i, j) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

} // namespace

TEST_CASE("kspace downscale preserves constants and is a no-op at s=1")
{
  Slice const c(320, 320, 0.7);
  auto const d = kspace_downscale(c, 2);
  CHECK(d.height == 160);
  CHECK(d.width == 160);
  CHECK(max_abs_diff(d, Slice(160, 160, 0.7)) <= 1e-12);

  auto const r = test::random_slice(32, 48, 1);
  CHECK(max_abs_diff(kspace_downscale(r, 1), r) <= 1e-12);
  CHECK(kind_of([&] { kspace_downscale(r, 5); }) == errc::DimensionMismatch);
}

TEST_CASE("kspace downscale removes energy")
{
  auto const sl = imgio::make_phantom(imgio::PhantomKind::shepp_logan, 320);
  auto const d = kspace_downscale(sl, 2);
  CHECK(d.height == 160);
  // Energy per unit area: scaling by 1/s keeps a constant image fixed, so the
  // area-normalized energy cannot grow.
  CHECK(energy(d) * 4.0 <= energy(sl));
}

TEST_CASE("kspace upscale")
{
  CHECK(max_abs_diff(kspace_upscale(Slice(16, 16, 0.3), 2), Slice(32, 32, 0.3)) <= 1e-12);
  auto const r = test::random_slice(8, 8, 2);
  CHECK(kspace_upscale(r, 1) == r);

  auto const band = cosine_image(32, {{2, 0, 0.2}, {1, 3, 0.1}, {-3, 2, 0.05}});
  auto const round_trip = kspace_upscale(kspace_downscale(band, 2), 2);
  CHECK(max_abs_diff(round_trip, band) <= 1e-10);
}

TEST_CASE("downscale then upscale equals the Fourier low-pass")
{
  std::size_t const n = 32;
  auto const x = cosine_image(n, {{2, 1, 0.15}, {0, 3, 0.1}, {11, 0, 0.08}, {3, 12, 0.05}});
  // Low-pass: zero everything outside the central 16x16 block.
  auto spec = fourier::fft2_centered(x);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      bool const keep = r >= 8 && r < 24 && c >= 8 && c < 24;
      if (!keep) { spec(r, c) = 0.0; }
    }
  }
  auto const lowpass = magnitude(fourier::ifft2_centered(spec));
  CHECK(max_abs_diff(kspace_upscale(kspace_downscale(x, 2), 2), lowpass) <= 1e-10);
}

TEST_CASE("catmull-rom kernel")
{
  CHECK(catmull_rom(0.0) == 1.0);
  CHECK(catmull_rom(1.0) == 0.0);
  CHECK(catmull_rom(2.0) == 0.0);
  for (double f : {0.0, 0.1, 0.37, 0.5, 0.99}) {
    double const sum = catmull_rom(f + 1) + catmull_rom(f) + catmull_rom(1 - f) + catmull_rom(2 - f);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("bicubic resample")
{
  auto const r = test::random_slice(13, 17, 3);
  CHECK(max_abs_diff(bicubic_resample(r, 13, 17), r) <= 1e-12);

  for (auto [oh, ow] : {std::pair{5, 7}, {40, 40}, {13, 64}}) {
    auto const out = bicubic_resample(Slice(10, 12, 0.42), std::size_t(oh), std::size_t(ow));
    CHECK(max_abs_diff(out, Slice(std::size_t(oh), std::size_t(ow), 0.42)) <= 1e-12);
  }

  Slice ramp(8, 8);
  for (std::size_t i = 0; i < 64; ++i) {
    ramp.values[i] = double(i) / 63.0;
  }
  CHECK(max_abs_diff(bicubic_resample(ramp, 32, 32), bicubic_oracle(ramp, 32, 32)) <= 1e-12);
  CHECK(max_abs_diff(bicubic_resample(r, 29, 8), bicubic_oracle(r, 29, 8)) <= 1e-12);

  // Overshoot is clipped.
  Slice step(1, 8, 0.0);
  for (std::size_t c = 4; c < 8; ++c) {
    step(0, c) = 1.0;
  }
  auto const up = bicubic_resample(step, 1, 32);
  CHECK(*std::max_element(up.values.begin(), up.values.end()) <= 1.0);
  CHECK(*std::min_element(up.values.begin(), up.values.end()) >= 0.0);
}

TEST_CASE("bicubic commutes with affine intensity maps inside the range")
{
  Slice x = test::random_slice(16, 16, 4);
  for (auto &v : x.values) {
    v = 0.3 + 0.4 * v;
  }
  double const a = 0.8, b = 0.05;
  Slice ax(16, 16);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ax.values[i] = a * x.values[i] + b;
  }
  auto const lhs = bicubic_resample(ax, 37, 21);
  auto rhs = bicubic_resample(x, 37, 21);
  for (auto &v : rhs.values) {
    v = a * v + b;
  }
  CHECK(max_abs_diff(lhs, rhs) <= 1e-10);
}

TEST_CASE("apply_mask is a projection")
{
  auto const spec = fourier::fft2_centered(test::random_slice(16, 16, 5));
  auto const all = masks::full_mask(16, 16);
  CHECK(apply_mask(spec, all) == spec);

  masks::Mask none{16, 16, std::vector<std::uint8_t>(256, 0), {}};
  for (auto const &v : apply_mask(spec, none).values) {
    CHECK(v == Complex{});
  }

  auto const m = masks::make_radial_mask(16, 16, 0.25);
  auto const once = apply_mask(spec, m);
  CHECK(apply_mask(once, m) == once);

  masks::Mask wrong = masks::full_mask(8, 16);
  CHECK(kind_of([&] { apply_mask(spec, wrong); }) == errc::DimensionMismatch);
}

TEST_CASE("degrade paths")
{
  auto const src = imgio::make_phantom(imgio::PhantomKind::shepp_logan, 320);

  DegradeSpec identity{Path::undersample, 1, masks::full_mask(320, 320), Recon::zero_filled};
  CHECK(max_abs_diff(degrade(src, identity), src) <= 1e-10);

  DegradeSpec combined{Path::combined, 2, masks::make_mask(masks::Pattern::radial, 160, 160, 0.5), Recon::zero_filled};
  auto const low = degrade(src, combined);
  CHECK(low.height == 160);
  CHECK(combined.total_acceleration() == 8);
  combined.recon = Recon::zero_filled_plus_bicubic;
  auto const up = degrade(src, combined);
  CHECK(up.height == 320);
  CHECK(up.width == 320);

  DegradeSpec lowres{Path::lowres, 2, std::nullopt, Recon::none};
  CHECK(degrade(src, lowres) == kspace_downscale(src, 2));
  CHECK(lowres.total_acceleration() == 4);
  lowres.downscale_method = DownscaleMethod::bicubic;
  CHECK(degrade(src, lowres) == bicubic_resample(src, 160, 160));

  DegradeSpec x4{Path::undersample, 1, masks::make_radial_mask(320, 320, 0.25), Recon::zero_filled};
  DegradeSpec x32{Path::undersample, 1, masks::make_radial_mask(320, 320, 0.03125), Recon::zero_filled};
  double const s4 = metrics::ssim(degrade(src, x4), src);
  double const s32 = metrics::ssim(degrade(src, x32), src);
  CHECK(s4 < 1.0);
  CHECK(s4 > s32);
}

TEST_CASE("degrade spec violations")
{
  auto const src = test::random_slice(32, 32, 6);
  auto const m16 = masks::full_mask(16, 16);
  CHECK(kind_of([&] { degrade(src, {Path::lowres, 2, m16, Recon::none}); }) == errc::InvalidArgument);
  CHECK(kind_of([&] { degrade(src, {Path::undersample, 2, m16, Recon::none}); }) == errc::InvalidArgument);
  CHECK(kind_of([&] { degrade(src, {Path::undersample, 1, std::nullopt, Recon::none}); }) == errc::InvalidArgument);
  CHECK(kind_of([&] { degrade(src, {Path::undersample, 1, m16, Recon::none}); }) == errc::DimensionMismatch);
  CHECK(kind_of([&] { degrade(src, {Path::combined, 3, m16, Recon::none}); }) == errc::DimensionMismatch);
}

TEST_CASE("zero-filled energy never exceeds the source")
{
  auto const src = imgio::make_phantom(imgio::PhantomKind::shepp_logan, 128);
  for (auto p : {masks::Pattern::fastmri, masks::Pattern::radial, masks::Pattern::spiral}) {
    for (double f : {0.5, 0.25, 0.125}) {
      auto const m = masks::make_mask(p, 128, 128, f, {.seed = 3});
      CHECK(energy(zero_filled(src, m)) <= energy(src) + 1e-9);
    }
  }
}

TEST_CASE("nested masks degrade monotonically")
{
  auto const src = imgio::make_phantom(imgio::PhantomKind::shepp_logan, 128);
  // Same seed: the fastmri column draws of the smaller fraction are a prefix.
  double prev = -1.0;
  for (double f : {0.125, 0.25, 0.5, 1.0}) {
    auto const m = masks::make_fastmri_mask(128, 128, f, 0.08, 17);
    double const s = metrics::ssim(zero_filled(src, m), src);
    CHECK(s + 1e-6 >= prev);
    prev = s;
  }
  // Spiral prefixes of one walk are nested too.
  auto const walk = masks::spiral_walk(128, 128, 1, 0.2);
  REQUIRE(walk.size() >= 8000);
  prev = -1.0;
  for (std::size_t count : {1000u, 2000u, 4000u, 8000u}) {
    masks::Mask m{128, 128, std::vector<std::uint8_t>(128 * 128, 0), {}};
    for (std::size_t i = 0; i < count; ++i) {
      m.bits[walk[i]] = 1;
    }
    double const s = metrics::ssim(zero_filled(src, m), src);
    CHECK(s + 1e-6 >= prev);
    prev = s;
  }
}
