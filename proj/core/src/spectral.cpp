#include "srdetect/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srdetect/fft.hpp"

namespace srdetect {

void SrConfig::validate() const {
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (avg_filter == 0 || avg_filter % 2 == 0)
    throw std::invalid_argument("avg_filter must be a positive odd integer");
  if (avg_filter > window) throw std::invalid_argument("avg_filter must be <= window");
  if (score_window == 0 || score_window >= window)
    throw std::invalid_argument("score_window must be in [1, window)");
  if (threshold <= 0.0) throw std::invalid_argument("threshold must be positive");
  if (estimated_points == 0) throw std::invalid_argument("estimated_points must be >= 1");
  if (gradient_points == 0) throw std::invalid_argument("gradient_points must be >= 1");
  if (log_epsilon <= 0.0) throw std::invalid_argument("log_epsilon must be positive");
  // The streaming loop predicts the tail from the real points before the
  // target, so it needs gradient_points + 1 of them plus the target itself.
  if (estimated_points + gradient_points + 2 > window)
    throw std::invalid_argument("window too small for estimated_points + gradient_points");
}

SrConfig SrConfig::defaults_for(Granularity g) {
  SrConfig cfg;
  cfg.window = default_window(g);
  return cfg;
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t q) {
  if (q == 0 || q % 2 == 0) throw std::invalid_argument("filter width must be odd");
  const std::size_t n = v.size();
  const long half = static_cast<long>(q / 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (long j = static_cast<long>(i) - half; j <= static_cast<long>(i) + half; ++j) {
      long idx = std::clamp(j, 0L, static_cast<long>(n) - 1);  // edge replication
      sum += v[static_cast<std::size_t>(idx)];
    }
    out[i] = sum / static_cast<double>(q);
  }
  return out;
}

std::pair<SpectralDecomposition, SaliencyMap> spectral_residual(const std::vector<double>& x,
                                                                const SrConfig& cfg) {
  if (x.size() < cfg.avg_filter)
    throw std::invalid_argument("input shorter than the average filter width");

  SpectralDecomposition d;
  std::tie(d.amplitude, d.phase) = fft::dft(x);

  d.log_amplitude.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    d.log_amplitude[k] = std::log(d.amplitude[k] + cfg.log_epsilon);

  d.avg_log_amplitude = moving_average(d.log_amplitude, cfg.avg_filter);

  d.residual.resize(x.size());
  std::vector<double> exp_residual(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    d.residual[k] = d.log_amplitude[k] - d.avg_log_amplitude[k];
    exp_residual[k] = std::exp(d.residual[k]);
  }

  SaliencyMap s;
  s.values = fft::inverse_dft(exp_residual, d.phase);
  return {std::move(d), std::move(s)};
}

}  // namespace srdetect
