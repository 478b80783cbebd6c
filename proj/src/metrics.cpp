#include "ksim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace ksim::metrics {

namespace {

std::vector<double> window_1d(SsimParams const &p)
{
  std::vector<double> w(p.window_size);
  double const center = double(p.window_size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double const d = double(i) - center;
    w[i] = p.window == WindowKind::uniform ? 1.0 : std::exp(-(d * d) / (2.0 * p.window_sigma * p.window_sigma));
    sum += w[i];
  }
  for (auto &v : w) {
    v /= sum;
  }
  return w;
}

// Mirror index: ... c b a | a b c ... | c b a ...
std::size_t reflect(long i, std::size_t n)
{
  long const len = long(n);
  while (i < 0 || i >= len) {
    i = i < 0 ? -i - 1 : 2 * len - i - 1;
  }
  return std::size_t(i);
}

std::vector<double> filter(std::vector<double> const &img, std::size_t h, std::size_t w, std::vector<double> const &k)
{
  long const half = long(k.size() / 2);
  std::vector<double> tmp(img.size()), out(img.size());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long j = -half; j <= half; ++j) {
        acc += k[std::size_t(j + half)] * img[r * w + reflect(long(c) + j, w)];
      }
      tmp[r * w + c] = acc;
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long j = -half; j <= half; ++j) {
        acc += k[std::size_t(j + half)] * tmp[reflect(long(r) + j, h) * w + c];
      }
      out[r * w + c] = acc;
    }
  }
  return out;
}

double ssim_global(Slice const &x, Slice const &y, SsimParams const &p)
{
  double const n = double(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x.values[i];
    sy += y.values[i];
  }
  double const mx = sx / n, my = sy / n;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double const dx = x.values[i] - mx, dy = y.values[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cxy += dx * dy;
  }
  return ssim_from_moments(mx, my, vx / n, vy / n, cxy / n, p);
}

double ssim_windowed(Slice const &x, Slice const &y, SsimParams const &p)
{
  std::size_t const h = x.height, w = x.width;
  auto const k = window_1d(p);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x.values[i] * x.values[i];
    yy[i] = y.values[i] * y.values[i];
    xy[i] = x.values[i] * y.values[i];
  }
  auto const mu_x = filter(x.values, h, w, k);
  auto const mu_y = filter(y.values, h, w, k);
  auto const e_xx = filter(xx, h, w, k);
  auto const e_yy = filter(yy, h, w, k);
  auto const e_xy = filter(xy, h, w, k);

  std::size_t const pad = p.window_size / 2;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = pad; r < h - pad; ++r) {
    for (std::size_t c = pad; c < w - pad; ++c) {
      std::size_t const i = r * w + c;
      double const mx = mu_x[i], my = mu_y[i];
      sum += ssim_from_moments(mx, my, e_xx[i] - mx * mx, e_yy[i] - my * my, e_xy[i] - mx * my, p);
      ++count;
    }
  }
  return sum / double(count);
}

} // namespace

std::string_view to_string(SsimMode m) { return m == SsimMode::global ? "global" : "windowed"; }

SsimMode parse_ssim_mode(std::string_view s)
{
  if (s == "global") { return SsimMode::global; }
  if (s == "windowed") { return SsimMode::windowed; }
  throw Error(errc::InvalidArgument, "unknown ssim mode '" + std::string(s) + "'");
}

double mse(Slice const &x, Slice const &y)
{
  require_same_shape(x, y, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double const d = x.values[i] - y.values[i];
    acc += d * d;
  }
  return acc / double(x.size());
}

double psnr_from_mse(double mse, double max_value)
{
  if (mse == 0.0) { return kInf; }
  return 10.0 * std::log10(max_value * max_value / mse);
}

double psnr(Slice const &x, Slice const &y, double max_value) { return psnr_from_mse(mse(x, y), max_value); }

double ssim_from_moments(double mu_x, double mu_y, double var_x, double var_y, double cov_xy, SsimParams const &p)
{
  double const c1 = p.c1(), c2 = p.c2();
  return ((2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)) /
         ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
}

double ssim(Slice const &x, Slice const &y, SsimParams const &params)
{
  require_same_shape(x, y, "ssim");
  if (x.size() == 0) { throw Error(errc::InvalidArgument, "empty images"); }
  if (!(params.k1 > 0 && params.k2 > 0 && params.L > 0)) { throw Error(errc::InvalidArgument, "k1, k2, L must be > 0"); }
  if (params.mode == SsimMode::global) { return ssim_global(x, y, params); }
  if (params.window_size < 3 || params.window_size % 2 == 0) {
    throw Error(errc::InvalidArgument, "window_size must be odd and >= 3");
  }
  if (params.window_size > x.height || params.window_size > x.width) {
    throw Error(errc::DimensionMismatch, "SSIM window larger than image");
  }
  return ssim_windowed(x, y, params);
}

IQReport evaluate(Slice const &reference, Slice const &test, SsimParams const &params, double max_value)
{
  double const m = mse(reference, test);
  return {m, psnr_from_mse(m, max_value), ssim(reference, test, params)};
}

Aggregate aggregate(std::span<double const> values)
{
  if (values.empty()) { throw Error(errc::EmptyInput, "aggregate of empty list"); }
  double const n = double(values.size());
  auto const infs = std::count(values.begin(), values.end(), kInf);
  if (infs > 0) {
    return {kInf, infs == std::ptrdiff_t(values.size()) ? 0.0 : std::nan(""), values.size()};
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  double const mean = sum / n;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / n), values.size()};
}

std::string render_value(double value, ScaleHint hint, int decimals)
{
  if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
  double const scale = hint == ScaleHint::mse_e4 ? 1e4 : (hint == ScaleHint::ssim_e2 ? 1e2 : 1.0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value * scale);
  return buf;
}

std::string render(Aggregate const &a, ScaleHint hint, int decimals)
{
  return render_value(a.mean, hint, decimals) + " ± " + render_value(a.std, hint, decimals);
}

std::string format_exact(double v)
{
  if (std::isnan(v)) { return "nan"; }
  if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace ksim::metrics
