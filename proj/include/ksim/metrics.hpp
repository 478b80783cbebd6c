#pragma once

#include "ksim/image.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace ksim::metrics {

enum class SsimMode
{
  global,  // one set of image-wide moments
  windowed // per-pixel moments under a normalized window, averaged
};

enum class WindowKind
{
  gaussian,
  uniform
};

std::string_view to_string(SsimMode m);
SsimMode parse_ssim_mode(std::string_view s);

struct SsimParams
{
  double k1 = 0.01;
  double k2 = 0.03;
  double L = 1.0; // intensity range
  SsimMode mode = SsimMode::global;
  std::size_t window_size = 11;
  double window_sigma = 1.5;
  WindowKind window = WindowKind::gaussian;

  double c1() const { return (k1 * L) * (k1 * L); }
  double c2() const { return (k2 * L) * (k2 * L); }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double mse(Slice const &x, Slice const &y);
/// +inf when the images are identical.
double psnr(Slice const &x, Slice const &y, double max_value = 1.0);
double psnr_from_mse(double mse, double max_value = 1.0);

/// Windowed mode filters with symmetric (mirror) edges and averages the SSIM
/// map over pixels whose window lies fully inside the image.
double ssim(Slice const &x, Slice const &y, SsimParams const &params = {});

/// The five moments entering the SSIM formula.
double ssim_from_moments(double mu_x, double mu_y, double var_x, double var_y, double cov_xy, SsimParams const &p);

struct IQReport
{
  double mse = 0.0;
  double psnr = kInf;
  double ssim = 1.0;
};

IQReport evaluate(Slice const &reference, Slice const &test, SsimParams const &params = {}, double max_value = 1.0);

enum class ScaleHint
{
  raw,
  mse_e4, // shown as value x 10^4
  ssim_e2 // shown as value x 10^2
};

struct Aggregate
{
  double mean = 0.0;
  double std = 0.0; // population (divisor n)
  std::size_t n = 0;
};

/// Mean and population standard deviation, summed in input order. If every
/// value is +inf the result is {inf, 0}; a partial +inf gives {inf, nan}.
Aggregate aggregate(std::span<double const> values);

/// Two-decimal table rendering after applying the scale hint, e.g. 0.001439
/// with mse_e4 gives "14.39".
std::string render_value(double value, ScaleHint hint, int decimals = 2);
std::string render(Aggregate const &a, ScaleHint hint, int decimals = 2);

/// 17 significant digits ("%.17g"); infinities as "inf"/"-inf", NaN as "nan".
std::string format_exact(double v);

} // namespace ksim::metrics
