#pragma once

#include "ksim/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ksim::imgio {

enum class Format
{
  pgm8,
  pgm16,
  ksim
};

std::string_view to_string(Format f);
Format parse_format(std::string_view name);

/// Picks the format from the file: ".ksim" by extension, PGM by maxval.
Format detect_format(std::filesystem::path const &path);

/*
 * KSIM container, all integers little-endian:
 *   bytes 0..3   "KSIM"
 *   bytes 4..5   version (u16, currently 1)
 *   bytes 6..7   dtype   (u16, 0 = f64, 1 = bool bitset)
 *   bytes 8..11  height  (u32)
 *   bytes 12..15 width   (u32)
 *   payload      row-major; f64 as IEEE-754 LE, bitset MSB-first with
 *                each row padded to a byte boundary
 */
inline constexpr std::uint16_t kKsimVersion = 1;
enum class KsimDtype : std::uint16_t
{
  f64 = 0,
  bits = 1
};

Slice read_slice(std::filesystem::path const &path, Format format);
Slice read_slice(std::filesystem::path const &path);

/// pgm8 is read-only; writing accepts pgm16 and ksim.
void write_slice(Slice const &slice, std::filesystem::path const &path, Format format);

std::vector<std::uint8_t> encode_ksim(Slice const &slice);
Slice decode_ksim(std::vector<std::uint8_t> const &bytes);

std::vector<std::uint8_t> encode_ksim_bits(std::size_t height, std::size_t width, std::vector<bool> const &bits);

std::vector<std::uint8_t> read_file(std::filesystem::path const &path);
void write_file(std::filesystem::path const &path, std::vector<std::uint8_t> const &bytes);

enum class PhantomKind
{
  shepp_logan,
  bimodal_field,
  ramp
};

/// Accepts "shepp_logan" / "shepp-logan" style spellings.
PhantomKind parse_phantom(std::string_view name);
std::string_view to_string(PhantomKind k);

/// Synthetic test slices, deterministic and within [0,1].
Slice make_phantom(PhantomKind kind, std::size_t size);

struct Ellipse
{
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;
};

/// Modified (Toft) Shepp-Logan table on the [-1,1]^2 square.
std::vector<Ellipse> const &shepp_logan_ellipses();

} // namespace ksim::imgio
