#pragma once

#include "ksim/image.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ksim::fourier {

/// Unnormalized 1D DFT of fixed length. Powers of two use an iterative
/// radix-2 kernel; other lengths go through Bluestein's chirp-z transform.
/// Immutable after construction, so one instance may be shared by threads.
class Fft1d
{
public:
  explicit Fft1d(std::size_t n);

  std::size_t size() const { return n_; }

  /// X[k] = sum_j x[j] exp(-2 pi i jk / n)
  void forward(std::span<Complex> data) const;
  /// x[j] = sum_k X[k] exp(+2 pi i jk / n), no 1/n factor.
  void backward(std::span<Complex> data) const;

private:
  void radix2(std::span<Complex> data) const;
  void bluestein(std::span<Complex> data) const;

  std::size_t n_;
  bool pow2_;
  std::vector<Complex> twiddle_; // radix-2 roots for length n_ (or m_ when Bluestein)
  std::vector<std::size_t> bitrev_;
  // Bluestein state
  std::size_t m_ = 0;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_hat_;
};

/// Orthonormal forward transform, DC moved to (H/2, W/2).
Spectrum fft2_centered(Slice const &slice);
Spectrum fft2_centered(ComplexImage const &image);

/// Exact inverse of fft2_centered; returns the complex image.
ComplexImage ifft2_centered(Spectrum const &spectrum);

/// Defining double sum, same layout and scaling as fft2_centered.
/// Restricted to H, W <= 64.
Spectrum dft2_direct(Slice const &slice);

inline constexpr std::size_t kDirectDftLimit = 64;

/// Index of the DC bin along an axis of length n.
constexpr std::size_t dc_index(std::size_t n) { return n / 2; }

} // namespace ksim::fourier
