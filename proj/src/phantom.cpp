#include "ksim/imgio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ksim::imgio {

namespace {

Slice shepp_logan(std::size_t n)
{
  auto const &table = shepp_logan_ellipses();
  Slice s(n, n);
  double const half = (double(n) - 1.0) / 2.0;
  for (std::size_t r = 0; r < n; ++r) {
    // Row 0 is the top of the head (+y).
    double const y = (half - double(r)) / half;
    for (std::size_t c = 0; c < n; ++c) {
      double const x = (double(c) - half) / half;
      double v = 0.0;
      for (auto const &e : table) {
        double const phi = e.angle_deg * std::numbers::pi / 180.0;
        double const dx = x - e.center_x;
        double const dy = y - e.center_y;
        double const u = dx * std::cos(phi) + dy * std::sin(phi);
        double const w = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.semi_x * e.semi_x) + (w * w) / (e.semi_y * e.semi_y) <= 1.0) { v += e.intensity; }
      }
      s(r, c) = v;
    }
  }
  // Overlapping intensities can cancel to tiny negatives (1 - 0.8 - 0.2).
  double peak = 0.0;
  for (auto &v : s.values) {
    v = std::max(v, 0.0);
    peak = std::max(peak, v);
  }
  for (auto &v : s.values) {
    v /= peak;
  }
  return s;
}

double normal_cdf(double x, double mu, double sigma)
{
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

// Quantile of N(mu, sigma) truncated to [lo, hi], by bisection on the CDF.
double truncated_normal_quantile(double p, double mu, double sigma, double lo, double hi)
{
  double const clo = normal_cdf(lo, mu, sigma);
  double const chi = normal_cdf(hi, mu, sigma);
  double const target = clo + p * (chi - clo);
  double a = lo, b = hi;
  for (int it = 0; it < 100; ++it) {
    double const m = 0.5 * (a + b);
    if (normal_cdf(m, mu, sigma) < target) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Two truncated-normal populations (modes 0.1 and 0.6) laid out as a
// radially decreasing blob. Pixel values are exact quantiles, so the
// histogram follows the mixture density without sampling noise.
Slice bimodal_field(std::size_t n)
{
  std::size_t const total = n * n;
  std::size_t const n_low = total / 2;
  std::size_t const n_high = total - n_low;

  std::vector<double> values;
  values.reserve(total);
  for (std::size_t k = 0; k < n_low; ++k) {
    values.push_back(truncated_normal_quantile((k + 0.5) / double(n_low), 0.1, 0.09, 0.0, 0.35));
  }
  for (std::size_t k = 0; k < n_high; ++k) {
    values.push_back(truncated_normal_quantile((k + 0.5) / double(n_high), 0.6, 0.11, 0.35, 1.0));
  }
  std::sort(values.begin(), values.end());

  double const cy = (double(n) - 1.0) / 2.0;
  std::vector<double> dist(total);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      dist[r * n + c] = std::hypot(double(r) - cy, double(c) - cy);
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Farthest pixel gets the smallest value.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });

  Slice s(n, n);
  for (std::size_t k = 0; k < total; ++k) {
    s.values[order[k]] = values[k];
  }
  return s;
}

Slice ramp(std::size_t n)
{
  Slice s(n, n);
  double const last = double(n * n - 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.values[i] = double(i) / last;
  }
  return s;
}

} // namespace

std::vector<Ellipse> const &shepp_logan_ellipses()
{
  static std::vector<Ellipse> const table{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  };
  return table;
}

PhantomKind parse_phantom(std::string_view name)
{
  std::string key(name);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "shepp_logan") { return PhantomKind::shepp_logan; }
  if (key == "bimodal_field") { return PhantomKind::bimodal_field; }
  if (key == "ramp") { return PhantomKind::ramp; }
  throw Error(errc::InvalidArgument, "unknown phantom kind '" + std::string(name) + "'");
}

std::string_view to_string(PhantomKind k)
{
  switch (k) {
  case PhantomKind::shepp_logan: return "shepp_logan";
  case PhantomKind::bimodal_field: return "bimodal_field";
  case PhantomKind::ramp: return "ramp";
  }
  return "?";
}

Slice make_phantom(PhantomKind kind, std::size_t size)
{
  // The ramp has no geometry, so small sizes are allowed for it.
  std::size_t const min_size = kind == PhantomKind::ramp ? 2 : 8;
  if (size < min_size) {
    throw Error(errc::InvalidArgument, "phantom size must be >= " + std::to_string(min_size));
  }
  switch (kind) {
  case PhantomKind::shepp_logan: return shepp_logan(size);
  case PhantomKind::bimodal_field: return bimodal_field(size);
  case PhantomKind::ramp: return ramp(size);
  }
  throw Error(errc::InvalidArgument, "unknown phantom kind");
}

} // namespace ksim::imgio
