#pragma once

#include "ksim/image.hpp"
#include "ksim/masks.hpp"

#include <optional>
#include <string_view>

namespace ksim::pipeline {

enum class Path
{
  undersample, // mask at full resolution
  lowres,      // central k-space block only
  combined     // central block, then mask at low resolution
};

enum class Recon
{
  none,
  zero_filled,
  zero_filled_plus_bicubic
};

enum class DownscaleMethod
{
  kspace,
  bicubic
};

std::string_view to_string(Path p);
std::string_view to_string(Recon r);
std::string_view to_string(DownscaleMethod m);
Path parse_path(std::string_view s);
Recon parse_recon(std::string_view s);
DownscaleMethod parse_downscale_method(std::string_view s);

struct DegradeSpec
{
  Path path = Path::undersample;
  unsigned downscale = 1;
  std::optional<masks::Mask> mask;
  Recon recon = Recon::zero_filled;
  DownscaleMethod downscale_method = DownscaleMethod::kspace;

  /// downscale^2 times the mask's acceleration (round(1/target_fraction)).
  unsigned total_acceleration() const;
};

/// Throws DimensionMismatch / InvalidArgument when the spec cannot apply to
/// a source of the given size.
void check_spec(DegradeSpec const &spec, std::size_t height, std::size_t width);

/// Central (H/s)x(W/s) block of the centered spectrum, scaled by 1/s, magnitude.
Slice kspace_downscale(Slice const &slice, unsigned s);

/// Symmetric zero padding of the spectrum to (H*s)x(W*s), scaled by s, magnitude.
Slice kspace_upscale(Slice const &slice, unsigned s);

/// Catmull-Rom (a = -0.5) separable resampling with pixel-center alignment
/// and clamped edges. Output clipped to [0,1].
Slice bicubic_resample(Slice const &slice, std::size_t out_h, std::size_t out_w);

/// Keys cubic convolution kernel with a = -0.5.
double catmull_rom(double t);

Spectrum apply_mask(Spectrum const &spectrum, masks::Mask const &mask);

/// fft -> mask -> ifft -> magnitude.
/// A full mask on non-negative input returns the input exactly.
Slice zero_filled(Slice const &slice, masks::Mask const &mask);

Slice degrade(Slice const &slice, DegradeSpec const &spec);

} // namespace ksim::pipeline
