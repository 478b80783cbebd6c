#include "ksim/fourier.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace ksim::fourier {

namespace {

// exp(-2 pi i num / den) with the angle reduced in integers first.
Complex root(std::size_t num, std::size_t den)
{
  num %= den;
  double const angle = -2.0 * std::numbers::pi * double(num) / double(den);
  return {std::cos(angle), std::sin(angle)};
}

std::vector<Complex> radix2_roots(std::size_t n)
{
  std::vector<Complex> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    w[k] = root(k, n);
  }
  return w;
}

std::vector<std::size_t> bit_reversal(std::size_t n)
{
  std::vector<std::size_t> rev(n, 0);
  int const bits = std::countr_zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b) {
      r |= ((i >> b) & 1u) << (bits - 1 - b);
    }
    rev[i] = r;
  }
  return rev;
}

void radix2_kernel(std::span<Complex> a, std::vector<Complex> const &w, std::vector<std::size_t> const &rev)
{
  std::size_t const n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i < rev[i]) { std::swap(a[i], a[rev[i]]); }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t const half = len / 2;
    std::size_t const stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex const t = w[k * stride] * a[start + k + half];
        Complex const u = a[start + k];
        a[start + k] = u + t;
        a[start + k + half] = u - t;
      }
    }
  }
}

template <typename Fn>
void shift_copy(std::size_t h, std::size_t w, std::size_t dh, std::size_t dw, Fn &&fn)
{
  for (std::size_t r = 0; r < h; ++r) {
    std::size_t const rr = (r + dh) % h;
    for (std::size_t c = 0; c < w; ++c) {
      fn(r, c, rr, (c + dw) % w);
    }
  }
}

// In-place unnormalized 2D transform of a row-major buffer.
void transform2d(std::vector<Complex> &data, std::size_t h, std::size_t w, bool inverse)
{
  Fft1d const row_fft(w);
  Fft1d const col_fft(h);
  for (std::size_t r = 0; r < h; ++r) {
    std::span<Complex> row(data.data() + r * w, w);
    inverse ? row_fft.backward(row) : row_fft.forward(row);
  }
  std::vector<Complex> col(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      col[r] = data[r * w + c];
    }
    inverse ? col_fft.backward(col) : col_fft.forward(col);
    for (std::size_t r = 0; r < h; ++r) {
      data[r * w + c] = col[r];
    }
  }
}

} // namespace

Fft1d::Fft1d(std::size_t n)
  : n_(n)
  , pow2_(std::has_single_bit(n))
{
  if (n == 0) { throw Error(errc::InvalidArgument, "FFT length must be positive"); }
  if (pow2_) {
    twiddle_ = radix2_roots(n);
    bitrev_ = bit_reversal(n);
    return;
  }
  m_ = std::bit_ceil(2 * n - 1);
  twiddle_ = radix2_roots(m_);
  bitrev_ = bit_reversal(m_);
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // exp(-i pi k^2 / n) == exp(-2 pi i (k^2 mod 2n) / 2n)
    chirp_[k] = root((k * k) % (2 * n), 2 * n);
  }
  kernel_hat_.assign(m_, Complex{});
  kernel_hat_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    kernel_hat_[k] = kernel_hat_[m_ - k] = std::conj(chirp_[k]);
  }
  radix2_kernel(kernel_hat_, twiddle_, bitrev_);
}

void Fft1d::radix2(std::span<Complex> data) const { radix2_kernel(data, twiddle_, bitrev_); }

void Fft1d::bluestein(std::span<Complex> data) const
{
  std::vector<Complex> a(m_, Complex{});
  for (std::size_t k = 0; k < n_; ++k) {
    a[k] = data[k] * chirp_[k];
  }
  radix2_kernel(a, twiddle_, bitrev_);
  for (std::size_t k = 0; k < m_; ++k) {
    a[k] = std::conj(a[k] * kernel_hat_[k]);
  }
  // Inverse via conjugation: ifft(x) = conj(fft(conj(x))) / m.
  radix2_kernel(a, twiddle_, bitrev_);
  double const inv_m = 1.0 / double(m_);
  for (std::size_t k = 0; k < n_; ++k) {
    data[k] = std::conj(a[k]) * inv_m * chirp_[k];
  }
}

void Fft1d::forward(std::span<Complex> data) const
{
  if (data.size() != n_) { throw Error(errc::DimensionMismatch, "FFT length"); }
  if (n_ == 1) { return; }
  pow2_ ? radix2(data) : bluestein(data);
}

void Fft1d::backward(std::span<Complex> data) const
{
  for (auto &v : data) {
    v = std::conj(v);
  }
  forward(data);
  for (auto &v : data) {
    v = std::conj(v);
  }
}

Spectrum fft2_centered(ComplexImage const &image)
{
  std::size_t const h = image.height, w = image.width;
  if (h == 0 || w == 0 || image.size() != h * w) { throw Error(errc::InvalidArgument, "empty or malformed image"); }
  std::vector<Complex> buf = image.values;
  transform2d(buf, h, w, false);
  double const scale = 1.0 / std::sqrt(double(h) * double(w));
  Spectrum out(h, w);
  shift_copy(h, w, dc_index(h), dc_index(w),
             [&](std::size_t r, std::size_t c, std::size_t rr, std::size_t cc) { out(rr, cc) = buf[r * w + c] * scale; });
  return out;
}

Spectrum fft2_centered(Slice const &slice)
{
  validate(slice);
  ComplexImage img(slice.height, slice.width);
  for (std::size_t i = 0; i < slice.size(); ++i) {
    img.values[i] = slice.values[i];
  }
  return fft2_centered(img);
}

ComplexImage ifft2_centered(Spectrum const &spectrum)
{
  std::size_t const h = spectrum.height, w = spectrum.width;
  if (h == 0 || w == 0 || spectrum.size() != h * w) { throw Error(errc::InvalidArgument, "empty or malformed spectrum"); }
  std::vector<Complex> buf(h * w);
  // Undo the centering: natural index k sits at (k + n/2) mod n.
  shift_copy(h, w, dc_index(h), dc_index(w),
             [&](std::size_t r, std::size_t c, std::size_t rr, std::size_t cc) { buf[r * w + c] = spectrum(rr, cc); });
  transform2d(buf, h, w, true);
  double const scale = 1.0 / std::sqrt(double(h) * double(w));
  for (auto &v : buf) {
    v *= scale;
  }
  return ComplexImage(h, w, std::move(buf));
}

Spectrum dft2_direct(Slice const &slice)
{
  validate(slice);
  std::size_t const h = slice.height, w = slice.width;
  if (h > kDirectDftLimit || w > kDirectDftLimit) {
    throw Error(errc::SizeGuard, "direct DFT limited to " + std::to_string(kDirectDftLimit) + " per axis");
  }
  std::vector<Complex> row_roots(w), col_roots(h);
  for (std::size_t k = 0; k < w; ++k) {
    row_roots[k] = root(k, w);
  }
  for (std::size_t k = 0; k < h; ++k) {
    col_roots[k] = root(k, h);
  }
  double const scale = 1.0 / std::sqrt(double(h) * double(w));
  Spectrum out(h, w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      Complex acc{};
      for (std::size_t m = 0; m < h; ++m) {
        Complex const cm = col_roots[(u * m) % h];
        for (std::size_t n = 0; n < w; ++n) {
          acc += slice(m, n) * cm * row_roots[(v * n) % w];
        }
      }
      out((u + dc_index(h)) % h, (v + dc_index(w)) % w) = acc * scale;
    }
  }
  return out;
}

} // namespace ksim::fourier
