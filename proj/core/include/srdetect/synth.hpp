#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srdetect/spectral.hpp"
#include "srdetect/timeseries.hpp"

namespace srdetect {

struct InjectionParams {
  double ratio = 0.01;        // fraction of points to perturb, in [0, 0.5)
  uint64_t seed = 0;
  std::size_t local_window = 21;  // preceding points used for the local average
  // Optional magnitude band for the standard-normal draw; the sign stays as
  // sampled. Defaults leave the draw unrestricted.
  double r_abs_min = 0.0;
  double r_abs_max = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// The injection kernel: (xbar + mean)(1 + var) * r + x, where xbar is the
/// local average of the preceding points, mean/var are taken over the window
/// (population variance) and x is the window's last value.
double injection_value(std::span<const double> window, std::size_t local_window, double r);

/// Perturbs ceil(ratio * n) points at seeded random indices (each at least
/// omega apart, all >= omega-1 so every injection is scoreable), labels them 1
/// and everything else 0. Returns the labeled series and the injected indices.
std::pair<TimeSeries, std::vector<std::size_t>> inject(const TimeSeries& series,
                                                       const InjectionParams& params,
                                                       const SrConfig& cfg);

struct BaseParams {
  double level = 10.0;
  double amplitude = 2.0;   // seasonal only
  std::size_t period = 24;  // seasonal only, in points
  double noise = 0.05;
  double step = 0.5;        // unstable (random walk) only
};

/// Seeded generator for the three canonical series shapes. class_tag is set,
/// all labels start at 0.
TimeSeries generate_base(SeriesClass kind, std::size_t n, uint64_t seed,
                         Granularity g = Granularity::Hour, const BaseParams& p = {});

/// Flat training set: size() rows of window floats plus one label each.
struct TrainingSet {
  std::size_t window = 0;
  std::vector<float> features;  // size() * window
  std::vector<float> labels;    // size()

  std::size_t size() const { return labels.size(); }
  std::span<const float> row(std::size_t i) const {
    return {features.data() + i * window, window};
  }
};

/// Injects anomalies into each source, runs the streaming SR transform and
/// emits one (saliency window, target-point label) pair per scoreable index.
TrainingSet build_training_set(const std::vector<TimeSeries>& sources,
                               const InjectionParams& params, const SrConfig& cfg);

/// Little-endian binary: "SRTS", u32 version, u32 window, u64 count, then
/// count rows of window f32 features and one f32 label.
void save_training_set(const TrainingSet& set, const std::string& path);
TrainingSet load_training_set(const std::string& path);

}  // namespace srdetect
