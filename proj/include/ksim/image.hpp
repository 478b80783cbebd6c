#pragma once

#include "ksim/error.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace ksim {

using Complex = std::complex<double>;

/// Row-major 2D array. Slice (real image) and Spectrum (centered k-space)
/// are the two instantiations used throughout.
template <typename T>
struct Grid
{
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(std::size_t h, std::size_t w, T fill = T{})
    : height(h)
    , width(w)
    , values(h * w, fill)
  {
  }
  Grid(std::size_t h, std::size_t w, std::vector<T> v)
    : height(h)
    , width(w)
    , values(std::move(v))
  {
    if (values.size() != h * w) {
      throw Error(errc::DimensionMismatch, "payload length " + std::to_string(values.size()) +
                                               " != " + std::to_string(h) + "x" + std::to_string(w));
    }
  }

  std::size_t size() const { return values.size(); }
  T &operator()(std::size_t r, std::size_t c) { return values[r * width + c]; }
  T const &operator()(std::size_t r, std::size_t c) const { return values[r * width + c]; }

  bool operator==(Grid const &) const = default;
};

using Slice = Grid<double>;
using ComplexImage = Grid<Complex>;
/// DC bin sits at (height / 2, width / 2).
using Spectrum = Grid<Complex>;

template <typename A, typename B>
bool same_shape(Grid<A> const &a, Grid<B> const &b)
{
  return a.height == b.height && a.width == b.width;
}

template <typename A, typename B>
void require_same_shape(Grid<A> const &a, Grid<B> const &b, char const *what)
{
  if (!same_shape(a, b)) {
    throw Error(errc::DimensionMismatch, std::string(what) + ": " + std::to_string(a.height) + "x" +
                                             std::to_string(a.width) + " vs " + std::to_string(b.height) +
                                             "x" + std::to_string(b.width));
  }
}

/// Throws unless the slice is non-empty, consistently sized and finite.
inline void validate(Slice const &s)
{
  if (s.height == 0 || s.width == 0) { throw Error(errc::InvalidArgument, "empty slice"); }
  if (s.values.size() != s.height * s.width) { throw Error(errc::DimensionMismatch, "slice payload length"); }
  for (double v : s.values) {
    if (!std::isfinite(v)) { throw Error(errc::NonFinite, "slice contains NaN/Inf"); }
  }
}

inline Slice magnitude(ComplexImage const &c)
{
  Slice out(c.height, c.width);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.values[i] = std::abs(c.values[i]);
  }
  return out;
}

inline Slice real_part(ComplexImage const &c)
{
  Slice out(c.height, c.width);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.values[i] = c.values[i].real();
  }
  return out;
}

inline double energy(Slice const &s)
{
  double e = 0.0;
  for (double v : s.values) {
    e += v * v;
  }
  return e;
}

inline double energy(ComplexImage const &s)
{
  double e = 0.0;
  for (auto const &v : s.values) {
    e += std::norm(v);
  }
  return e;
}

} // namespace ksim
