#pragma once

#include "ksim/image.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ksim::normalize {

/// Percentile of `values` (p in [0,100]) with linear interpolation between
/// order statistics at rank p/100 * (n - 1).
double percentile(std::span<double const> values, double p);

/// clip((x - P[p_lo]) / (P[p_hi] - P[p_lo]), 0, 1). Throws DegenerateRange
/// when the two percentiles coincide.
Slice normalize_percentile(Slice const &slice, double p_lo = 2.0, double p_hi = 98.0);

/// Least-squares polynomial in monomials of t, where t maps [lo, hi] onto [-1, 1].
struct PolyFit
{
  int degree = 0;
  std::vector<double> coeffs; // c0 + c1 t + ... + cd t^d
  double lo = 0.0;
  double hi = 1.0;

  double to_t(double x) const { return (2.0 * x - (lo + hi)) / (hi - lo); }
  double from_t(double t) const { return 0.5 * ((hi - lo) * t + (lo + hi)); }
  double eval_t(double t) const;
  double derivative_t(double t) const;
  double operator()(double x) const { return eval_t(to_t(x)); }
};

/// Solved by Householder QR on the Vandermonde matrix.
PolyFit fit_poly(std::span<double const> x, std::span<double const> y, int degree, double lo, double hi);

struct Histogram
{
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> centers;
  std::vector<double> counts; // rescaled so the tallest bin is 1

  double bin_width() const { return (hi - lo) / double(counts.size()); }
};

/// Uniform bins over [min(x), max(x)]; the maximum lands in the last bin.
Histogram histogram(Slice const &slice, std::size_t bin_count);

PolyFit fit_histogram_poly(Slice const &slice, std::size_t bin_count = 256, int degree = 15);

struct Extremum
{
  enum class Kind
  {
    min,
    max
  };
  double intensity;
  Kind kind;
};

inline constexpr std::size_t kExtremaGrid = 4096;

/// Critical points of the fit, sorted by intensity. Derivative sign changes
/// on a uniform grid are refined by bisection to 1e-10 in t.
std::vector<Extremum> find_extrema(PolyFit const &fit);

struct HistogramNormParams
{
  std::size_t bin_count = 256;
  int poly_degree = 15;
  double alpha = 5.0;
  /// Minimum fitted-count rise from m to M (counts are scaled to peak 1);
  /// shallower pairs are wiggles of a flat histogram and trigger fallback.
  double min_prominence = 0.01;

  static constexpr double unset = std::numeric_limits<double>::quiet_NaN();
  double m_intensity = unset;
  double M_intensity = unset;
  double width = unset;
  double delta = unset;
};

struct HistogramNormResult
{
  Slice slice;
  HistogramNormParams params;
  bool fallback = false;
};

/// Window of width alpha * (M - m) centred on the first histogram maximum M
/// above the first minimum m, then min-max to [0,1] with clipping. Without
/// such a pair the percentile method is used and `fallback` is set.
HistogramNormResult normalize_histogram(Slice const &slice, HistogramNormParams params = {});

} // namespace ksim::normalize
