#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace srdetect::fft {

/// Transform plan for one fixed size. Power-of-two sizes use an iterative
/// radix-2 kernel with precomputed twiddles; all other sizes go through
/// Bluestein's chirp-z algorithm on a padded power-of-two grid.
/// Immutable after construction, shareable across threads.
class Plan {
 public:
  explicit Plan(std::size_t n);

  std::size_t size() const { return n_; }

  /// In-place unnormalized forward transform.
  void forward(std::vector<std::complex<double>>& data) const;
  /// In-place inverse transform with 1/n normalization.
  void inverse(std::vector<std::complex<double>>& data) const;

 private:
  void pow2_forward(std::vector<std::complex<double>>& data) const;

  std::size_t n_;
  bool pow2_;
  std::size_t m_;  // padded power-of-two size (== n_ when pow2_)
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::complex<double>> chirp_;      // exp(-i pi k^2 / n)
  std::vector<std::complex<double>> chirp_fft_;  // FFT of the zero-padded conjugate chirp
};

/// Process-wide plan cache keyed by size.
std::shared_ptr<const Plan> plan_for(std::size_t n);

/// Amplitude and phase spectrum of a real sequence, O(n log n), any n >= 1.
std::pair<std::vector<double>, std::vector<double>> dft(const std::vector<double>& x);

/// Elementwise magnitudes of the inverse transform (1/n convention) of the
/// complex spectrum amplitude[k] * exp(i * phase[k]).
std::vector<double> inverse_dft(const std::vector<double>& amplitude,
                                const std::vector<double>& phase);

}  // namespace srdetect::fft
