#pragma once

#include "ksim/image.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ksim::masks {

enum class Pattern
{
  fastmri,
  radial,
  spiral,
  unknown
};

std::string_view to_string(Pattern p);
Pattern parse_pattern(std::string_view name);

struct FastmriParams
{
  double center_fraction = 0.08;
  bool operator==(FastmriParams const &) const = default;
};

struct RadialParams
{
  std::size_t spoke_count = 0; // complete spokes; the exact-count fill comes on top
  double angle_offset = 0.0;
  bool operator==(RadialParams const &) const = default;
};

struct SpiralParams
{
  std::size_t arm_count = 1;
  double pitch = 0.0; // b in r = b * theta, pixels per radian
  bool operator==(SpiralParams const &) const = default;
};

using PatternParams = std::variant<std::monostate, FastmriParams, RadialParams, SpiralParams>;

struct MaskMeta
{
  Pattern pattern = Pattern::unknown;
  double target_fraction = 1.0;
  double achieved_fraction = 1.0;
  std::uint64_t seed = 0;
  PatternParams params;
  bool operator==(MaskMeta const &) const = default;
};

/// Sampling pattern in centered k-space coordinates (DC at (H/2, W/2)).
struct Mask
{
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits; // 0 or 1, row-major
  MaskMeta meta;

  bool at(std::size_t r, std::size_t c) const { return bits[r * width + c] != 0; }
  std::size_t popcount() const;
  bool operator==(Mask const &) const = default;
};

/// floor(x + 0.5) with a relative guard so 0.15 * 10 counts as 1.5.
std::size_t round_half_up(double x);

/// 1 / accel.
double accel_to_fraction(unsigned accel);
/// Downscaling by s keeps 1/s^2 of k-space, so totals multiply.
unsigned total_accel(unsigned downscale, unsigned undersample_accel);

inline constexpr double kDefaultCenterFraction = 0.08;

Mask make_fastmri_mask(std::size_t height, std::size_t width, double fraction,
                       double center_fraction = kDefaultCenterFraction, std::uint64_t seed = 0);

Mask make_radial_mask(std::size_t height, std::size_t width, double fraction, double angle_offset = 0.0);

Mask make_spiral_mask(std::size_t height, std::size_t width, double fraction, std::size_t arm_count = 1);

/// Union of n full diameters at angles offset + i*pi/n, no exact-count fill.
std::vector<std::uint8_t> radial_spoke_union(std::size_t height, std::size_t width, std::size_t spokes,
                                             double angle_offset);

/// Cells visited by the Archimedean walk, in first-visit order.
std::vector<std::size_t> spiral_walk(std::size_t height, std::size_t width, std::size_t arm_count, double pitch);

struct MaskOptions
{
  std::uint64_t seed = 0;
  double center_fraction = kDefaultCenterFraction;
  double angle_offset = 0.0;
  std::size_t arm_count = 1;
};

/// Dispatches on pattern. A fraction of 1 yields the full mask for every
/// pattern (radial/spiral generators themselves stop at 0.5).
Mask make_mask(Pattern pattern, std::size_t height, std::size_t width, double fraction, MaskOptions const &opts = {});

Mask full_mask(std::size_t height, std::size_t width, Pattern pattern = Pattern::unknown);

/// PBM P4 encoding of the bits (no metadata).
std::vector<std::uint8_t> encode_pbm(Mask const &mask);
std::string sidecar_json(MaskMeta const &meta, std::size_t height, std::size_t width);

/// Writes `path` as PBM P4 and the metadata to `path` with a ".json" extension.
void write_mask(Mask const &mask, std::filesystem::path const &path);
/// Without a sidecar the pattern is "unknown" and fractions come from the popcount.
Mask read_mask(std::filesystem::path const &path);

std::filesystem::path sidecar_path(std::filesystem::path const &pbm_path);

} // namespace ksim::masks
