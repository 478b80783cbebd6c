#include "ksim/masks.hpp"
#include "ksim/imgio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace ksim::masks {

using nlohmann::json;

namespace {

void check_fraction(double fraction, double hi)
{
  if (!(fraction > 0.0 && fraction <= hi)) {
    throw Error(errc::FractionOutOfRange, "fraction " + std::to_string(fraction) + " outside (0, " +
                                              std::to_string(hi) + "]");
  }
}

void check_dims(std::size_t h, std::size_t w)
{
  if (h == 0 || w == 0) { throw Error(errc::InvalidArgument, "mask dimensions must be positive"); }
}

// Uniform integer in [0, n) by rejection, so the stream only depends on mt19937_64.
std::uint64_t draw_below(std::mt19937_64 &rng, std::uint64_t n)
{
  std::uint64_t const max = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t const limit = max - max % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Supercover walk from the center of cell (cy, cx) along (dx, dy) until the
// ray leaves the grid. Corner crossings mark both side neighbours.
template <typename Mark>
void supercover_ray(std::size_t h, std::size_t w, double dx, double dy, Mark &&mark)
{
  long ix = long(w / 2), iy = long(h / 2);
  long const sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  double const inf = std::numeric_limits<double>::infinity();
  double const delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : inf;
  double const delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : inf;
  double tx = 0.5 * delta_x, ty = 0.5 * delta_y;
  auto inside = [&](long y, long x) { return x >= 0 && y >= 0 && x < long(w) && y < long(h); };
  while (inside(iy, ix)) {
    mark(std::size_t(iy) * w + std::size_t(ix));
    double const tie = 1e-9 * std::max(1.0, std::min(tx, ty));
    if (tx < ty - tie) {
      ix += sx;
      tx += delta_x;
    } else if (ty < tx - tie) {
      iy += sy;
      ty += delta_y;
    } else {
      if (inside(iy, ix + sx)) { mark(std::size_t(iy) * w + std::size_t(ix + sx)); }
      if (inside(iy + sy, ix)) { mark(std::size_t(iy + sy) * w + std::size_t(ix)); }
      ix += sx;
      iy += sy;
      tx += delta_x;
      ty += delta_y;
    }
  }
}

template <typename Mark>
void rasterize_spoke(std::size_t h, std::size_t w, double angle, Mark &&mark)
{
  double const dx = std::cos(angle), dy = std::sin(angle);
  supercover_ray(h, w, dx, dy, mark);
  supercover_ray(h, w, -dx, -dy, mark);
}

std::size_t count_ones(std::vector<std::uint8_t> const &bits)
{
  return std::size_t(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

// Squared distance of a cell from DC, used to order fill pixels.
double radius2(std::size_t idx, std::size_t h, std::size_t w)
{
  double const dr = double(idx / w) - double(h / 2);
  double const dc = double(idx % w) - double(w / 2);
  return dr * dr + dc * dc;
}

void sort_by_radius(std::vector<std::size_t> &cells, std::size_t h, std::size_t w)
{
  std::sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
    double const ra = radius2(a, h, w), rb = radius2(b, h, w);
    return ra != rb ? ra < rb : a < b;
  });
}

Mask finish(std::size_t h, std::size_t w, std::vector<std::uint8_t> bits, MaskMeta meta)
{
  Mask m{h, w, std::move(bits), std::move(meta)};
  m.meta.achieved_fraction = double(m.popcount()) / double(h * w);
  return m;
}

} // namespace

std::string_view to_string(Pattern p)
{
  switch (p) {
  case Pattern::fastmri: return "fastmri";
  case Pattern::radial: return "radial";
  case Pattern::spiral: return "spiral";
  case Pattern::unknown: return "unknown";
  }
  return "unknown";
}

Pattern parse_pattern(std::string_view name)
{
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  if (key == "fastmri" || key == "cartesian") { return Pattern::fastmri; }
  if (key == "radial") { return Pattern::radial; }
  if (key == "spiral") { return Pattern::spiral; }
  if (key == "unknown") { return Pattern::unknown; }
  throw Error(errc::InvalidArgument, "unknown mask pattern '" + std::string(name) + "'");
}

std::size_t Mask::popcount() const { return count_ones(bits); }

std::size_t round_half_up(double x)
{
  if (!(x >= 0.0) || !std::isfinite(x)) { throw Error(errc::InvalidArgument, "cannot round " + std::to_string(x)); }
  return std::size_t(std::floor(x + 0.5 + 1e-9 * std::max(1.0, x)));
}

double accel_to_fraction(unsigned accel)
{
  if (accel == 0) { throw Error(errc::InvalidArgument, "acceleration must be >= 1"); }
  return 1.0 / double(accel);
}

unsigned total_accel(unsigned downscale, unsigned undersample_accel)
{
  if (downscale == 0 || undersample_accel == 0) { throw Error(errc::InvalidArgument, "factors must be >= 1"); }
  return downscale * downscale * undersample_accel;
}

Mask full_mask(std::size_t height, std::size_t width, Pattern pattern)
{
  check_dims(height, width);
  MaskMeta meta;
  meta.pattern = pattern;
  meta.target_fraction = 1.0;
  return finish(height, width, std::vector<std::uint8_t>(height * width, 1), meta);
}

Mask make_fastmri_mask(std::size_t height, std::size_t width, double fraction, double center_fraction,
                       std::uint64_t seed)
{
  check_dims(height, width);
  check_fraction(fraction, 1.0);
  if (!(center_fraction >= 0.0 && center_fraction <= 1.0)) {
    throw Error(errc::InvalidArgument, "center_fraction outside [0, 1]");
  }
  std::size_t const n_center = round_half_up(center_fraction * double(width));
  std::size_t const n_total = round_half_up(fraction * double(width));
  if (n_total < n_center) {
    throw Error(errc::FractionBelowCenter, std::to_string(n_total) + " columns requested but the center band needs " +
                                               std::to_string(n_center));
  }

  std::vector<std::uint8_t> column(width, 0);
  std::size_t const first = width / 2 - n_center / 2;
  for (std::size_t c = first; c < first + n_center; ++c) {
    column[c] = 1;
  }
  std::vector<std::size_t> pool;
  for (std::size_t c = 0; c < width; ++c) {
    if (!column[c]) { pool.push_back(c); }
  }
  // Partial Fisher-Yates: the first n picks are a uniform draw without replacement.
  std::mt19937_64 rng(seed);
  std::size_t const n_random = n_total - n_center;
  for (std::size_t i = 0; i < n_random; ++i) {
    std::size_t const j = i + std::size_t(draw_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
    column[pool[i]] = 1;
  }

  std::vector<std::uint8_t> bits(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    std::copy(column.begin(), column.end(), bits.begin() + std::ptrdiff_t(r * width));
  }
  MaskMeta meta{Pattern::fastmri, fraction, 0.0, seed, FastmriParams{center_fraction}};
  return finish(height, width, std::move(bits), meta);
}

std::vector<std::uint8_t> radial_spoke_union(std::size_t height, std::size_t width, std::size_t spokes,
                                             double angle_offset)
{
  check_dims(height, width);
  std::vector<std::uint8_t> bits(height * width, 0);
  for (std::size_t i = 0; i < spokes; ++i) {
    double const angle = angle_offset + double(i) * std::numbers::pi / double(spokes);
    rasterize_spoke(height, width, angle, [&](std::size_t idx) { bits[idx] = 1; });
  }
  return bits;
}

Mask make_radial_mask(std::size_t height, std::size_t width, double fraction, double angle_offset)
{
  check_dims(height, width);
  check_fraction(fraction, 0.5);
  std::size_t const target = round_half_up(fraction * double(height * width));
  auto count = [&](std::size_t n) { return count_ones(radial_spoke_union(height, width, n, angle_offset)); };

  // Largest n with count(n) <= target: gallop, then bisect on (lo, hi].
  std::size_t lo = 0, hi = 1;
  std::size_t const cap = 64 * std::max(height, width);
  while (count(hi) <= target) {
    lo = hi;
    hi *= 2;
    if (hi > cap) { throw Error(errc::FractionOutOfRange, "spoke search did not terminate"); }
  }
  while (hi - lo > 1) {
    std::size_t const mid = lo + (hi - lo) / 2;
    (count(mid) <= target ? lo : hi) = mid;
  }
  std::size_t const n = lo;

  auto bits = radial_spoke_union(height, width, n, angle_offset);
  std::size_t have = count_ones(bits);

  // Fill from the next spoke (index n of the n+1 layout), then the rest of
  // that layout, nearest-to-DC first.
  std::vector<std::uint8_t> seen(bits);
  std::vector<std::size_t> next_spoke;
  double const next_angle = angle_offset + double(n) * std::numbers::pi / double(n + 1);
  rasterize_spoke(height, width, next_angle, [&](std::size_t idx) {
    if (!seen[idx]) {
      seen[idx] = 1;
      next_spoke.push_back(idx);
    }
  });
  sort_by_radius(next_spoke, height, width);
  std::vector<std::size_t> rest;
  auto const wider = radial_spoke_union(height, width, n + 1, angle_offset);
  for (std::size_t idx = 0; idx < wider.size(); ++idx) {
    if (wider[idx] && !seen[idx]) { rest.push_back(idx); }
  }
  sort_by_radius(rest, height, width);
  for (auto const *list : {&next_spoke, &rest}) {
    for (std::size_t idx : *list) {
      if (have == target) { break; }
      bits[idx] = 1;
      ++have;
    }
  }
  if (have != target) { throw Error(errc::FractionOutOfRange, "radial fill could not reach the target count"); }

  MaskMeta meta{Pattern::radial, fraction, 0.0, 0, RadialParams{n, angle_offset}};
  return finish(height, width, std::move(bits), meta);
}

std::vector<std::size_t> spiral_walk(std::size_t height, std::size_t width, std::size_t arm_count, double pitch)
{
  check_dims(height, width);
  if (arm_count == 0 || !(pitch > 0.0)) { throw Error(errc::InvalidArgument, "spiral needs arms >= 1 and pitch > 0"); }
  double const cy = double(height / 2), cx = double(width / 2);
  double const r_max = std::hypot(double(height) / 2.0, double(width) / 2.0);
  double const arm_step = 2.0 * std::numbers::pi / double(arm_count);

  std::vector<std::uint8_t> seen(height * width, 0);
  std::vector<std::size_t> order;
  double theta = 0.0;
  while (pitch * theta <= r_max) {
    double const r = pitch * theta;
    for (std::size_t a = 0; a < arm_count; ++a) {
      double const phi = theta + double(a) * arm_step;
      double const x = std::floor(cx + r * std::cos(phi) + 0.5);
      double const y = std::floor(cy + r * std::sin(phi) + 0.5);
      if (x < 0 || y < 0 || x >= double(width) || y >= double(height)) { continue; }
      std::size_t const idx = std::size_t(y) * width + std::size_t(x);
      if (!seen[idx]) {
        seen[idx] = 1;
        order.push_back(idx);
      }
    }
    // Arc length over the step is at most 0.5 px.
    theta += 0.5 / (pitch * std::sqrt(1.0 + std::pow(theta + 0.5 / pitch, 2)));
  }
  return order;
}

Mask make_spiral_mask(std::size_t height, std::size_t width, double fraction, std::size_t arm_count)
{
  check_dims(height, width);
  check_fraction(fraction, 0.5);
  if (arm_count == 0) { throw Error(errc::InvalidArgument, "arm_count must be >= 1"); }
  if (height < 8 || width < 8) { throw Error(errc::BisectionFailure, "spiral geometry needs H, W >= 8"); }
  std::size_t const target = round_half_up(fraction * double(height * width));
  auto count = [&](double pitch) { return spiral_walk(height, width, arm_count, pitch).size(); };

  // Smaller pitch means tighter turns and more cells. Dense end: 0.5 px ring
  // spacing; sparse end: under one radian of sweep.
  double dense = 0.5 * double(arm_count) / (2.0 * std::numbers::pi);
  double sparse = std::hypot(double(height) / 2.0, double(width) / 2.0);
  std::size_t const dense_count = count(dense);
  if (dense_count < target) { throw Error(errc::BisectionFailure, "densest spiral cannot reach the target count"); }

  double best = dense;
  std::size_t best_excess = dense_count - target;
  if (std::size_t const c = count(sparse); c >= target) {
    best = sparse;
    best_excess = c - target;
  } else {
    for (int it = 0; it < 64 && best_excess > 1; ++it) {
      double const mid = std::sqrt(dense * sparse);
      std::size_t const c = count(mid);
      if (c >= target) {
        dense = mid;
        if (c - target < best_excess) {
          best = mid;
          best_excess = c - target;
        }
      } else {
        sparse = mid;
      }
    }
  }

  auto const order = spiral_walk(height, width, arm_count, best);
  std::vector<std::uint8_t> bits(height * width, 0);
  for (std::size_t i = 0; i < target; ++i) {
    bits[order[i]] = 1;
  }
  MaskMeta meta{Pattern::spiral, fraction, 0.0, 0, SpiralParams{arm_count, best}};
  return finish(height, width, std::move(bits), meta);
}

Mask make_mask(Pattern pattern, std::size_t height, std::size_t width, double fraction, MaskOptions const &opts)
{
  if (fraction == 1.0) {
    Mask m = full_mask(height, width, pattern);
    m.meta.seed = pattern == Pattern::fastmri ? opts.seed : 0;
    switch (pattern) {
    case Pattern::fastmri: m.meta.params = FastmriParams{opts.center_fraction}; break;
    case Pattern::radial: m.meta.params = RadialParams{0, opts.angle_offset}; break;
    case Pattern::spiral: m.meta.params = SpiralParams{opts.arm_count, 0.0}; break;
    case Pattern::unknown: break;
    }
    return m;
  }
  switch (pattern) {
  case Pattern::fastmri: return make_fastmri_mask(height, width, fraction, opts.center_fraction, opts.seed);
  case Pattern::radial: return make_radial_mask(height, width, fraction, opts.angle_offset);
  case Pattern::spiral: return make_spiral_mask(height, width, fraction, opts.arm_count);
  case Pattern::unknown: break;
  }
  throw Error(errc::InvalidArgument, "cannot generate a mask of unknown pattern");
}

std::vector<std::uint8_t> encode_pbm(Mask const &mask)
{
  std::string const header = "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  std::size_t const row_bytes = (mask.width + 7) / 8;
  std::vector<std::uint8_t> out(header.begin(), header.end());
  std::size_t const base = out.size();
  out.resize(base + row_bytes * mask.height, 0);
  for (std::size_t r = 0; r < mask.height; ++r) {
    for (std::size_t c = 0; c < mask.width; ++c) {
      if (mask.at(r, c)) { out[base + r * row_bytes + c / 8] |= std::uint8_t(0x80u >> (c % 8)); }
    }
  }
  return out;
}

namespace {

json params_json(PatternParams const &p)
{
  json j = json::object();
  if (auto const *f = std::get_if<FastmriParams>(&p)) {
    j["center_fraction"] = f->center_fraction;
  } else if (auto const *r = std::get_if<RadialParams>(&p)) {
    j["spoke_count"] = r->spoke_count;
    j["angle_offset"] = r->angle_offset;
  } else if (auto const *s = std::get_if<SpiralParams>(&p)) {
    j["arm_count"] = s->arm_count;
    j["pitch"] = s->pitch;
  }
  return j;
}

PatternParams params_from_json(Pattern pattern, json const &j)
{
  switch (pattern) {
  case Pattern::fastmri: return FastmriParams{j.at("center_fraction").get<double>()};
  case Pattern::radial: return RadialParams{j.at("spoke_count").get<std::size_t>(), j.at("angle_offset").get<double>()};
  case Pattern::spiral: return SpiralParams{j.at("arm_count").get<std::size_t>(), j.at("pitch").get<double>()};
  case Pattern::unknown: break;
  }
  return std::monostate{};
}

} // namespace

std::string sidecar_json(MaskMeta const &meta, std::size_t height, std::size_t width)
{
  json j;
  j["pattern"] = std::string(to_string(meta.pattern));
  j["height"] = height;
  j["width"] = width;
  j["target_fraction"] = meta.target_fraction;
  j["achieved_fraction"] = meta.achieved_fraction;
  j["seed"] = meta.seed;
  j["params"] = params_json(meta.params);
  return j.dump(2) + "\n";
}

std::filesystem::path sidecar_path(std::filesystem::path const &pbm_path)
{
  auto p = pbm_path;
  p.replace_extension(".json");
  return p;
}

void write_mask(Mask const &mask, std::filesystem::path const &path)
{
  imgio::write_file(path, encode_pbm(mask));
  auto const text = sidecar_json(mask.meta, mask.height, mask.width);
  imgio::write_file(sidecar_path(path), std::vector<std::uint8_t>(text.begin(), text.end()));
}

Mask read_mask(std::filesystem::path const &path)
{
  auto const bytes = imgio::read_file(path);
  // P4 header: magic, width, height, then a single whitespace byte.
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < bytes.size() && (std::isspace(bytes[pos]) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') {
          ++pos;
        }
      } else {
        ++pos;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) { throw Error(errc::FormatError, "malformed PBM header"); }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + std::size_t(bytes[pos++] - '0');
      if (v > (1u << 16)) { throw Error(errc::FormatError, "PBM dimension overflow"); }
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '4') { throw Error(errc::FormatError, "not a PBM P4 file"); }
  pos = 2;
  std::size_t const width = number();
  std::size_t const height = number();
  if (width == 0 || height == 0 || pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(errc::FormatError, "malformed PBM header");
  }
  ++pos;
  std::size_t const row_bytes = (width + 7) / 8;
  if (bytes.size() - pos < row_bytes * height) { throw Error(errc::FormatError, "truncated PBM raster"); }

  Mask m;
  m.height = height;
  m.width = width;
  m.bits.assign(height * width, 0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      m.bits[r * width + c] = (bytes[pos + r * row_bytes + c / 8] >> (7 - c % 8)) & 1u;
    }
  }

  auto const side = sidecar_path(path);
  if (!std::filesystem::exists(side)) {
    double const f = double(m.popcount()) / double(height * width);
    m.meta = MaskMeta{Pattern::unknown, f, f, 0, std::monostate{}};
    return m;
  }
  try {
    auto const text = imgio::read_file(side);
    json const j = json::parse(text.begin(), text.end());
    if (j.at("height").get<std::size_t>() != height || j.at("width").get<std::size_t>() != width) {
      throw Error(errc::FormatError, "sidecar dimensions disagree with the bitmap");
    }
    m.meta.pattern = parse_pattern(j.at("pattern").get<std::string>());
    m.meta.target_fraction = j.at("target_fraction").get<double>();
    m.meta.achieved_fraction = j.at("achieved_fraction").get<double>();
    m.meta.seed = j.at("seed").get<std::uint64_t>();
    m.meta.params = params_from_json(m.meta.pattern, j.at("params"));
  } catch (json::exception const &e) {
    throw Error(errc::FormatError, "malformed sidecar " + side.string() + ": " + e.what());
  }
  return m;
}

} // namespace ksim::masks
