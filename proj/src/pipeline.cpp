#include "ksim/pipeline.hpp"
#include "ksim/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace ksim::pipeline {

namespace {

using fourier::dc_index;

// One separable pass along rows (horizontal == true) or columns.
Slice resample_axis(Slice const &in, std::size_t out_len, bool horizontal)
{
  std::size_t const in_len = horizontal ? in.width : in.height;
  std::size_t const other = horizontal ? in.height : in.width;
  Slice out = horizontal ? Slice(in.height, out_len) : Slice(out_len, in.width);
  double const ratio = double(in_len) / double(out_len);
  long const last = long(in_len) - 1;

  for (std::size_t i = 0; i < out_len; ++i) {
    double const src = (double(i) + 0.5) * ratio - 0.5;
    long const base = long(std::floor(src));
    double const frac = src - double(base);
    double weights[4];
    long taps[4];
    for (int k = 0; k < 4; ++k) {
      weights[k] = catmull_rom(frac - double(k - 1));
      taps[k] = std::clamp(base + k - 1, 0L, last);
    }
    for (std::size_t j = 0; j < other; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        acc += weights[k] * (horizontal ? in(j, std::size_t(taps[k])) : in(std::size_t(taps[k]), j));
      }
      (horizontal ? out(j, i) : out(i, j)) = acc;
    }
  }
  return out;
}

} // namespace

std::string_view to_string(Path p)
{
  switch (p) {
  case Path::undersample: return "undersample";
  case Path::lowres: return "lowres";
  case Path::combined: return "combined";
  }
  return "?";
}

std::string_view to_string(Recon r)
{
  switch (r) {
  case Recon::none: return "none";
  case Recon::zero_filled: return "zero_filled";
  case Recon::zero_filled_plus_bicubic: return "zero_filled_plus_bicubic";
  }
  return "?";
}

std::string_view to_string(DownscaleMethod m) { return m == DownscaleMethod::kspace ? "kspace" : "bicubic"; }

Path parse_path(std::string_view s)
{
  if (s == "undersample") { return Path::undersample; }
  if (s == "lowres") { return Path::lowres; }
  if (s == "combined") { return Path::combined; }
  throw Error(errc::InvalidArgument, "unknown path '" + std::string(s) + "'");
}

Recon parse_recon(std::string_view s)
{
  if (s == "none") { return Recon::none; }
  if (s == "zero_filled" || s == "zero-filled") { return Recon::zero_filled; }
  if (s == "zero_filled_plus_bicubic" || s == "zero-filled-plus-bicubic" || s == "bicubic") {
    return Recon::zero_filled_plus_bicubic;
  }
  throw Error(errc::InvalidArgument, "unknown recon '" + std::string(s) + "'");
}

DownscaleMethod parse_downscale_method(std::string_view s)
{
  if (s == "kspace") { return DownscaleMethod::kspace; }
  if (s == "bicubic") { return DownscaleMethod::bicubic; }
  throw Error(errc::InvalidArgument, "unknown downscale method '" + std::string(s) + "'");
}

unsigned DegradeSpec::total_acceleration() const
{
  unsigned undersample = 1;
  if (mask) { undersample = unsigned(masks::round_half_up(1.0 / mask->meta.target_fraction)); }
  return masks::total_accel(downscale, undersample);
}

void check_spec(DegradeSpec const &spec, std::size_t height, std::size_t width)
{
  if (spec.downscale == 0) { throw Error(errc::InvalidArgument, "downscale must be >= 1"); }
  if (height % spec.downscale || width % spec.downscale) {
    throw Error(errc::DimensionMismatch, "downscale " + std::to_string(spec.downscale) + " does not divide " +
                                             std::to_string(height) + "x" + std::to_string(width));
  }
  switch (spec.path) {
  case Path::lowres:
    if (spec.mask) { throw Error(errc::InvalidArgument, "lowres path takes no mask"); }
    return;
  case Path::undersample:
    if (spec.downscale != 1) { throw Error(errc::InvalidArgument, "undersample path requires downscale 1"); }
    break;
  case Path::combined: break;
  }
  if (!spec.mask) { throw Error(errc::InvalidArgument, "path requires a mask"); }
  if (spec.mask->height != height / spec.downscale || spec.mask->width != width / spec.downscale) {
    throw Error(errc::DimensionMismatch, "mask is " + std::to_string(spec.mask->height) + "x" +
                                             std::to_string(spec.mask->width) + ", expected " +
                                             std::to_string(height / spec.downscale) + "x" +
                                             std::to_string(width / spec.downscale));
  }
}

Slice kspace_downscale(Slice const &slice, unsigned s)
{
  validate(slice);
  if (s == 0 || slice.height % s || slice.width % s) {
    throw Error(errc::DimensionMismatch, "downscale factor must divide both dimensions");
  }
  if (s == 1) { return slice; }
  std::size_t const h = slice.height / s, w = slice.width / s;
  auto const full = fourier::fft2_centered(slice);
  // Align DC bins: block row r maps to source row r + (H/2 - h/2).
  std::size_t const r0 = dc_index(slice.height) - dc_index(h);
  std::size_t const c0 = dc_index(slice.width) - dc_index(w);
  double const scale = 1.0 / double(s);
  Spectrum block(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      block(r, c) = full(r + r0, c + c0) * scale;
    }
  }
  return magnitude(fourier::ifft2_centered(block));
}

Slice kspace_upscale(Slice const &slice, unsigned s)
{
  validate(slice);
  if (s == 0) { throw Error(errc::InvalidArgument, "upscale factor must be >= 1"); }
  if (s == 1) { return slice; }
  std::size_t const h = slice.height * s, w = slice.width * s;
  auto const small = fourier::fft2_centered(slice);
  std::size_t const r0 = dc_index(h) - dc_index(slice.height);
  std::size_t const c0 = dc_index(w) - dc_index(slice.width);
  Spectrum padded(h, w);
  for (std::size_t r = 0; r < slice.height; ++r) {
    for (std::size_t c = 0; c < slice.width; ++c) {
      padded(r + r0, c + c0) = small(r, c) * double(s);
    }
  }
  return magnitude(fourier::ifft2_centered(padded));
}

double catmull_rom(double t)
{
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t < 1.0) { return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0; }
  if (t < 2.0) { return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a; }
  return 0.0;
}

Slice bicubic_resample(Slice const &slice, std::size_t out_h, std::size_t out_w)
{
  validate(slice);
  if (out_h == 0 || out_w == 0) { throw Error(errc::InvalidArgument, "output dimensions must be positive"); }
  Slice out = resample_axis(resample_axis(slice, out_w, true), out_h, false);
  for (auto &v : out.values) {
    v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

Spectrum apply_mask(Spectrum const &spectrum, masks::Mask const &mask)
{
  if (spectrum.height != mask.height || spectrum.width != mask.width) {
    throw Error(errc::DimensionMismatch, "mask and spectrum sizes differ");
  }
  Spectrum out(spectrum.height, spectrum.width);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (mask.bits[i]) { out.values[i] = spectrum.values[i]; }
  }
  return out;
}

Slice zero_filled(Slice const &slice, masks::Mask const &mask)
{
  // A full mask keeps every coefficient; for non-negative input the round trip
  // is the identity, so skip it and avoid FFT rounding noise.
  bool const full = mask.popcount() == mask.bits.size();
  if (full && mask.height == slice.height && mask.width == slice.width &&
      std::all_of(slice.values.begin(), slice.values.end(), [](double v) { return v >= 0.0; })) {
    return slice;
  }
  return magnitude(fourier::ifft2_centered(apply_mask(fourier::fft2_centered(slice), mask)));
}

Slice degrade(Slice const &slice, DegradeSpec const &spec)
{
  validate(slice);
  check_spec(spec, slice.height, slice.width);

  auto downscale = [&](Slice const &x) {
    if (spec.downscale == 1) { return x; }
    if (spec.downscale_method == DownscaleMethod::bicubic) {
      return bicubic_resample(x, x.height / spec.downscale, x.width / spec.downscale);
    }
    return kspace_downscale(x, spec.downscale);
  };

  Slice out;
  switch (spec.path) {
  case Path::undersample: out = zero_filled(slice, *spec.mask); break;
  case Path::lowres: out = downscale(slice); break;
  case Path::combined: out = zero_filled(downscale(slice), *spec.mask); break;
  }
  if (spec.recon == Recon::zero_filled_plus_bicubic && (out.height != slice.height || out.width != slice.width)) {
    out = bicubic_resample(out, slice.height, slice.width);
  }
  return out;
}

} // namespace ksim::pipeline
