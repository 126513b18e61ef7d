#include "srdetect/fft.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace srdetect::fft {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

Plan::Plan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw std::invalid_argument("transform size must be >= 1");
  m_ = pow2_ ? n : next_pow2(2 * n - 1);

  // Bit-reversal permutation and twiddles for the radix-2 kernel of size m_.
  rev_.assign(m_, 0);
  std::size_t log2m = 0;
  while ((std::size_t{1} << log2m) < m_) ++log2m;
  for (std::size_t i = 0; i < m_; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < log2m; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2m - 1 - b);
    rev_[i] = r;
  }
  twiddle_.resize(m_ / 2);
  for (std::size_t k = 0; k < m_ / 2; ++k)
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(m_));

  if (!pow2_) {
    // chirp_[k] = exp(-i pi k^2 / n); k^2 taken mod 2n to keep the angle exact.
    chirp_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t k2 = (k * k) % (2 * n_);
      chirp_[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) /
                                      static_cast<double>(n_));
    }
    std::vector<std::complex<double>> b(m_, {0.0, 0.0});
    b[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k) b[k] = b[m_ - k] = std::conj(chirp_[k]);
    pow2_forward(b);
    chirp_fft_ = std::move(b);
  }
}

void Plan::pow2_forward(std::vector<std::complex<double>>& data) const {
  const std::size_t m = m_;
  for (std::size_t i = 0; i < m; ++i)
    if (i < rev_[i]) std::swap(data[i], data[rev_[i]]);
  for (std::size_t len = 2; len <= m; len <<= 1) {
    const std::size_t step = m / len;
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < m; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<double> w = twiddle_[j * step];
        const std::complex<double> u = data[start + j];
        const std::complex<double> v = data[start + j + half] * w;
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
}

void Plan::forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != n_) throw std::invalid_argument("plan/input size mismatch");
  if (pow2_) {
    pow2_forward(data);
    return;
  }
  std::vector<std::complex<double>> a(m_, {0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
  pow2_forward(a);
  for (std::size_t k = 0; k < m_; ++k) a[k] = std::conj(a[k] * chirp_fft_[k]);
  // Inverse of the pow2 transform via conjugation; combined with the outer
  // conjugate above this stays a single forward kernel pass.
  pow2_forward(a);
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(a[k]) * inv_m * chirp_[k];
}

void Plan::inverse(std::vector<std::complex<double>>& data) const {
  if (data.size() != n_) throw std::invalid_argument("plan/input size mismatch");
  for (auto& c : data) c = std::conj(c);
  forward(data);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (auto& c : data) c = std::conj(c) * inv_n;
}

std::shared_ptr<const Plan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::shared_ptr<const Plan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const Plan>(n);
  cache.emplace(n, plan);
  return plan;
}

std::pair<std::vector<double>, std::vector<double>> dft(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("dft of empty input");
  auto plan = plan_for(x.size());
  std::vector<std::complex<double>> data(x.begin(), x.end());
  plan->forward(data);
  std::vector<double> amplitude(x.size()), phase(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    amplitude[k] = std::abs(data[k]);
    phase[k] = std::arg(data[k]);
  }
  return {std::move(amplitude), std::move(phase)};
}

std::vector<double> inverse_dft(const std::vector<double>& amplitude,
                                const std::vector<double>& phase) {
  if (amplitude.size() != phase.size())
    throw std::invalid_argument("amplitude/phase length mismatch");
  if (amplitude.empty()) throw std::invalid_argument("inverse_dft of empty input");
  auto plan = plan_for(amplitude.size());
  std::vector<std::complex<double>> data(amplitude.size());
  for (std::size_t k = 0; k < amplitude.size(); ++k)
    data[k] = std::polar(amplitude[k], phase[k]);
  plan->inverse(data);
  std::vector<double> out(amplitude.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(data[k]);
  return out;
}

}  // namespace srdetect::fft
