#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "srdetect/timeseries.hpp"

namespace srdetect {

/// Hyper-parameters of the spectral-residual detector.
struct SrConfig {
  std::size_t window = 1440;        // omega: sliding window size
  std::size_t avg_filter = 3;       // q: width of the log-spectrum average filter (odd)
  std::size_t score_window = 21;    // z: preceding points used for the local saliency average
  double threshold = 3.0;           // tau: anomaly threshold on the normalized saliency deviation
  std::size_t estimated_points = 5; // kappa: extrapolated points appended after the latest value
  std::size_t gradient_points = 5;  // m: points used for the extrapolation gradient
  double log_epsilon = 1e-8;        // guard inside log() and for zero denominators

  void validate() const;  // throws std::invalid_argument
  static SrConfig defaults_for(Granularity g);
};

struct SpectralDecomposition {
  std::vector<double> amplitude;
  std::vector<double> phase;
  std::vector<double> log_amplitude;
  std::vector<double> avg_log_amplitude;
  std::vector<double> residual;  // log_amplitude - avg_log_amplitude
};

struct SaliencyMap {
  std::vector<double> values;  // non-negative, index-aligned to the input
};

/// Centered moving average of width q (odd) with edge replication.
std::vector<double> moving_average(const std::vector<double>& v, std::size_t q);

/// The spectral-residual transform: log amplitude spectrum minus its local
/// average, taken back to the time domain; the magnitudes form the saliency map.
std::pair<SpectralDecomposition, SaliencyMap> spectral_residual(const std::vector<double>& x,
                                                                const SrConfig& cfg);

}  // namespace srdetect
