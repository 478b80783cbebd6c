#include "ksim/imgio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace ksim::imgio {

namespace {

constexpr std::size_t kMaxDim = 1u << 16;
constexpr std::size_t kKsimHeader = 16;

void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v)
{
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

std::uint64_t get_le(std::vector<std::uint8_t> const &in, std::size_t at, int bytes)
{
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t(in[at + i]) << (8 * i);
  }
  return v;
}

void check_dims(std::uint64_t h, std::uint64_t w)
{
  if (h == 0 || w == 0) { throw Error(errc::FormatError, "zero dimension"); }
  if (h > kMaxDim || w > kMaxDim) { throw Error(errc::FormatError, "dimension overflow"); }
}

// Netpbm header tokenizer: whitespace separated, '#' comments to end of line.
struct PnmHeader
{
  std::string magic;
  std::uint64_t width = 0;
  std::uint64_t height = 0;
  std::uint64_t maxval = 1;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(std::vector<std::uint8_t> const &bytes, bool has_maxval)
{
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') {
          ++pos;
        }
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::uint64_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) { throw Error(errc::FormatError, "malformed header"); }
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) { throw Error(errc::FormatError, "dimension overflow"); }
      ++pos;
    }
    return v;
  };

  PnmHeader h;
  if (bytes.size() < 2) { throw Error(errc::FormatError, "truncated header"); }
  h.magic = std::string{char(bytes[0]), char(bytes[1])};
  pos = 2;
  h.width = number();
  h.height = number();
  if (has_maxval) { h.maxval = number(); }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) { throw Error(errc::FormatError, "malformed header"); }
  h.data_offset = pos + 1;
  check_dims(h.height, h.width);
  return h;
}

Slice read_pgm(std::vector<std::uint8_t> const &bytes, Format format)
{
  auto const h = parse_pnm_header(bytes, true);
  if (h.magic != "P5") { throw Error(errc::FormatError, "not a binary PGM (P5)"); }
  if (h.maxval == 0 || h.maxval > 65535) { throw Error(errc::FormatError, "bad maxval"); }
  bool const wide = h.maxval > 255;
  if (format == Format::pgm8 && wide) { throw Error(errc::FormatError, "pgm8 requested but maxval > 255"); }
  if (format == Format::pgm16 && !wide) { throw Error(errc::FormatError, "pgm16 requested but maxval <= 255"); }

  std::size_t const n = h.width * h.height;
  std::size_t const bps = wide ? 2 : 1;
  if (bytes.size() - h.data_offset < n * bps) { throw Error(errc::FormatError, "truncated raster"); }
  double const scale = wide ? 65535.0 : 255.0;
  Slice s(h.height, h.width);
  std::uint8_t const *p = bytes.data() + h.data_offset;
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = wide ? (unsigned(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
    if (v > h.maxval) { throw Error(errc::FormatError, "sample exceeds maxval"); }
    s.values[i] = v / scale;
  }
  return s;
}

std::vector<std::uint8_t> encode_pgm16(Slice const &slice)
{
  std::string const header = "P5\n" + std::to_string(slice.width) + " " + std::to_string(slice.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 2 * slice.size());
  for (double v : slice.values) {
    auto const q = static_cast<std::uint16_t>(std::floor(std::clamp(v, 0.0, 1.0) * 65535.0 + 0.5));
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xFF));
  }
  return out;
}

void put_header(std::vector<std::uint8_t> &out, KsimDtype dtype, std::size_t h, std::size_t w)
{
  check_dims(h, w);
  out.insert(out.end(), {'K', 'S', 'I', 'M'});
  put_u16(out, kKsimVersion);
  put_u16(out, static_cast<std::uint16_t>(dtype));
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(w));
}

} // namespace

std::string_view to_string(Format f)
{
  switch (f) {
  case Format::pgm8: return "pgm8";
  case Format::pgm16: return "pgm16";
  case Format::ksim: return "ksim";
  }
  return "?";
}

Format parse_format(std::string_view name)
{
  if (name == "pgm8") { return Format::pgm8; }
  if (name == "pgm16") { return Format::pgm16; }
  if (name == "ksim") { return Format::ksim; }
  throw Error(errc::InvalidArgument, "unknown image format '" + std::string(name) + "'");
}

std::vector<std::uint8_t> read_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw Error(errc::IoError, "cannot open " + path.string()); }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(std::filesystem::path const &path, std::vector<std::uint8_t> const &bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) { throw Error(errc::IoError, "cannot open " + path.string() + " for writing"); }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) { throw Error(errc::IoError, "write failed for " + path.string()); }
}

Format detect_format(std::filesystem::path const &path)
{
  if (path.extension() == ".ksim") { return Format::ksim; }
  auto const bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "KSIM", 4) == 0) { return Format::ksim; }
  auto const h = parse_pnm_header(bytes, true);
  return h.maxval > 255 ? Format::pgm16 : Format::pgm8;
}

std::vector<std::uint8_t> encode_ksim(Slice const &slice)
{
  std::vector<std::uint8_t> out;
  out.reserve(kKsimHeader + 8 * slice.size());
  put_header(out, KsimDtype::f64, slice.height, slice.width);
  for (double v : slice.values) {
    auto const bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_ksim_bits(std::size_t height, std::size_t width, std::vector<bool> const &bits)
{
  if (bits.size() != height * width) { throw Error(errc::DimensionMismatch, "bitset length"); }
  std::size_t const row_bytes = (width + 7) / 8;
  std::vector<std::uint8_t> out;
  put_header(out, KsimDtype::bits, height, width);
  std::size_t const base = out.size();
  out.resize(base + row_bytes * height, 0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (bits[r * width + c]) { out[base + r * row_bytes + c / 8] |= std::uint8_t(0x80u >> (c % 8)); }
    }
  }
  return out;
}

Slice decode_ksim(std::vector<std::uint8_t> const &bytes)
{
  if (bytes.size() < kKsimHeader || std::memcmp(bytes.data(), "KSIM", 4) != 0) {
    throw Error(errc::FormatError, "missing KSIM magic");
  }
  auto const version = get_le(bytes, 4, 2);
  if (version != kKsimVersion) { throw Error(errc::FormatError, "unsupported KSIM version " + std::to_string(version)); }
  auto const dtype = get_le(bytes, 6, 2);
  auto const h = get_le(bytes, 8, 4);
  auto const w = get_le(bytes, 12, 4);
  check_dims(h, w);
  std::size_t const payload = bytes.size() - kKsimHeader;

  Slice s(h, w);
  if (dtype == static_cast<std::uint16_t>(KsimDtype::f64)) {
    if (payload != 8 * h * w) { throw Error(errc::FormatError, "payload length mismatch"); }
    for (std::size_t i = 0; i < h * w; ++i) {
      double const v = std::bit_cast<double>(get_le(bytes, kKsimHeader + 8 * i, 8));
      if (!std::isfinite(v)) { throw Error(errc::NonFinite, "non-finite payload value"); }
      s.values[i] = v;
    }
  } else if (dtype == static_cast<std::uint16_t>(KsimDtype::bits)) {
    std::size_t const row_bytes = (w + 7) / 8;
    if (payload != row_bytes * h) { throw Error(errc::FormatError, "payload length mismatch"); }
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        bool const bit = bytes[kKsimHeader + r * row_bytes + c / 8] & (0x80u >> (c % 8));
        s(r, c) = bit ? 1.0 : 0.0;
      }
    }
  } else {
    throw Error(errc::FormatError, "unknown dtype " + std::to_string(dtype));
  }
  return s;
}

Slice read_slice(std::filesystem::path const &path, Format format)
{
  auto const bytes = read_file(path);
  if (format == Format::ksim) { return decode_ksim(bytes); }
  return read_pgm(bytes, format);
}

Slice read_slice(std::filesystem::path const &path) { return read_slice(path, detect_format(path)); }

void write_slice(Slice const &slice, std::filesystem::path const &path, Format format)
{
  validate(slice);
  switch (format) {
  case Format::ksim: write_file(path, encode_ksim(slice)); return;
  case Format::pgm16: write_file(path, encode_pgm16(slice)); return;
  case Format::pgm8: break;
  }
  throw Error(errc::InvalidArgument, "writing pgm8 is not supported; use pgm16 or ksim");
}

} // namespace ksim::imgio
