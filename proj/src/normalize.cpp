#include "ksim/normalize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ksim::normalize {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

Slice affine_clip(Slice const &slice, double lo, double width)
{
  Slice out(slice.height, slice.width);
  for (std::size_t i = 0; i < slice.size(); ++i) {
    out.values[i] = clip01((slice.values[i] - lo) / width);
  }
  return out;
}

} // namespace

double percentile(std::span<double const> values, double p)
{
  if (values.empty()) { throw Error(errc::EmptyInput, "percentile of empty set"); }
  if (!(p >= 0.0 && p <= 100.0)) { throw Error(errc::InvalidArgument, "percentile outside [0, 100]"); }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double const rank = p / 100.0 * double(sorted.size() - 1);
  auto const below = std::size_t(std::floor(rank));
  auto const above = std::min(below + 1, sorted.size() - 1);
  double const frac = rank - double(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

Slice normalize_percentile(Slice const &slice, double p_lo, double p_hi)
{
  validate(slice);
  double const lo = percentile(slice.values, p_lo);
  double const hi = percentile(slice.values, p_hi);
  if (!(hi > lo)) {
    throw Error(errc::DegenerateRange, "percentiles " + std::to_string(p_lo) + " and " + std::to_string(p_hi) +
                                           " coincide at " + std::to_string(lo));
  }
  return affine_clip(slice, lo, hi - lo);
}

double PolyFit::eval_t(double t) const
{
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * t + *it;
  }
  return acc;
}

double PolyFit::derivative_t(double t) const
{
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    acc = acc * t + double(k) * coeffs[k];
  }
  return acc;
}

PolyFit fit_poly(std::span<double const> x, std::span<double const> y, int degree, double lo, double hi)
{
  if (x.size() != y.size()) { throw Error(errc::DimensionMismatch, "x and y lengths differ"); }
  if (degree < 0) { throw Error(errc::InvalidArgument, "negative degree"); }
  if (x.size() < std::size_t(degree) + 1) { throw Error(errc::InvalidArgument, "fewer samples than coefficients"); }
  if (!(hi > lo)) { throw Error(errc::DegenerateRange, "zero-width fit domain"); }

  PolyFit fit{degree, {}, lo, hi};
  Eigen::Index const n = Eigen::Index(x.size());
  Eigen::MatrixXd vander(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double const t = fit.to_t(x[std::size_t(i)]);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      vander(i, k) = p;
      p *= t;
    }
    rhs(i) = y[std::size_t(i)];
  }
  Eigen::VectorXd const c = vander.householderQr().solve(rhs);
  fit.coeffs.assign(c.data(), c.data() + c.size());
  return fit;
}

Histogram histogram(Slice const &slice, std::size_t bin_count)
{
  validate(slice);
  if (bin_count == 0) { throw Error(errc::InvalidArgument, "bin_count must be positive"); }
  auto const [mn, mx] = std::minmax_element(slice.values.begin(), slice.values.end());
  if (!(*mx > *mn)) { throw Error(errc::DegenerateRange, "constant slice has no histogram range"); }
  Histogram h;
  h.lo = *mn;
  h.hi = *mx;
  h.counts.assign(bin_count, 0.0);
  double const scale = double(bin_count) / (h.hi - h.lo);
  for (double v : slice.values) {
    auto bin = std::size_t((v - h.lo) * scale);
    h.counts[std::min(bin, bin_count - 1)] += 1.0;
  }
  double const peak = *std::max_element(h.counts.begin(), h.counts.end());
  for (auto &c : h.counts) {
    c /= peak;
  }
  h.centers.resize(bin_count);
  for (std::size_t b = 0; b < bin_count; ++b) {
    h.centers[b] = h.lo + (double(b) + 0.5) * h.bin_width();
  }
  return h;
}

PolyFit fit_histogram_poly(Slice const &slice, std::size_t bin_count, int degree)
{
  if (degree < 0 || bin_count <= std::size_t(degree)) {
    throw Error(errc::InvalidArgument, "bin_count must exceed the polynomial degree");
  }
  auto const h = histogram(slice, bin_count);
  return fit_poly(h.centers, h.counts, degree, h.lo, h.hi);
}

std::vector<Extremum> find_extrema(PolyFit const &fit)
{
  std::vector<Extremum> out;
  if (fit.coeffs.size() < 3) { return out; }
  // Values below this are rounding noise of the derivative evaluation.
  double bound = 0.0;
  for (std::size_t k = 1; k < fit.coeffs.size(); ++k) {
    bound += double(k) * std::abs(fit.coeffs[k]);
  }
  double const noise = 1e-12 * bound;
  auto sign = [&](double d) { return d > noise ? 1 : (d < -noise ? -1 : 0); };

  std::size_t const n = kExtremaGrid;
  auto grid_t = [&](std::size_t k) { return -1.0 + 2.0 * double(k) / double(n - 1); };

  int last_sign = 0;
  double last_t = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    double const t = grid_t(k);
    int const s = sign(fit.derivative_t(t));
    if (s == 0) { continue; }
    if (last_sign != 0 && s != last_sign) {
      double a = last_t, b = t;
      int const sa = last_sign;
      while (b - a > 1e-10) {
        double const mid = 0.5 * (a + b);
        double const dm = fit.derivative_t(mid);
        if ((dm > 0 ? 1 : -1) == sa) {
          a = mid;
        } else {
          b = mid;
        }
      }
      auto const kind = last_sign > 0 ? Extremum::Kind::max : Extremum::Kind::min;
      out.push_back({fit.from_t(0.5 * (a + b)), kind});
    }
    last_sign = s;
    last_t = t;
  }
  return out;
}

HistogramNormResult normalize_histogram(Slice const &slice, HistogramNormParams params)
{
  validate(slice);
  if (!(params.alpha > 0.0) || params.poly_degree < 2) {
    throw Error(errc::InvalidArgument, "alpha must be > 0 and poly_degree >= 2");
  }
  auto const fallback = [&] {
    return HistogramNormResult{normalize_percentile(slice), params, true};
  };
  auto const [mn, mx] = std::minmax_element(slice.values.begin(), slice.values.end());
  if (!(*mx > *mn)) { return fallback(); }

  auto const fit = fit_histogram_poly(slice, params.bin_count, params.poly_degree);
  auto const extrema = find_extrema(fit);
  auto const first_min = std::find_if(extrema.begin(), extrema.end(),
                                      [](Extremum const &e) { return e.kind == Extremum::Kind::min; });
  if (first_min == extrema.end()) { return fallback(); }
  auto const first_max = std::find_if(first_min, extrema.end(), [&](Extremum const &e) {
    return e.kind == Extremum::Kind::max && e.intensity > first_min->intensity;
  });
  if (first_max == extrema.end()) { return fallback(); }
  if (fit(first_max->intensity) - fit(first_min->intensity) < params.min_prominence) { return fallback(); }

  params.m_intensity = first_min->intensity;
  params.M_intensity = first_max->intensity;
  params.delta = std::abs(params.M_intensity - params.m_intensity);
  params.width = params.alpha * params.delta;
  double const lo = params.M_intensity - 0.5 * params.width;
  return HistogramNormResult{affine_clip(slice, lo, params.width), params, false};
}

} // namespace ksim::normalize
