#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "srdetect/spectral.hpp"
#include "srdetect/timeseries.hpp"

namespace srdetect {

struct DetectionResult {
  std::size_t index = 0;
  int64_t timestamp = 0;
  double score = 0.0;
  bool is_anomaly = false;
};

/// Threshold rule on the saliency map: score is the deviation of S[i] from the
/// local average of the preceding min(z, i) values, normalized by that average.
/// i == 0 scores 0 and is never an anomaly.
DetectionResult threshold_decide(const SaliencyMap& s, std::size_t i, const SrConfig& cfg);

/// Extrapolates one value past the end of x from the average gradient of the
/// last m points and returns kappa copies of it.
std::vector<double> estimate_tail(std::span<const double> x, const SrConfig& cfg);

/// Streaming helper shared by the SR and CNN detectors: for every index
/// i in [window-1, n) builds the extended window (omega-kappa trailing real
/// points plus kappa estimated points), runs the SR transform and calls
/// fn(i, saliency, target_pos) where target_pos is the in-window position of
/// point i. The estimated points are predicted from the history before the
/// target so an anomalous target cannot mask its own saliency. When fn
/// returns true the target is marked anomalous and later windows skip it when
/// picking the points that anchor the tail estimate, so a detected outlier
/// cannot distort the predictions that follow it.
void for_each_stream_window(
    const TimeSeries& series, const SrConfig& cfg,
    const std::function<bool(std::size_t, const SaliencyMap&, std::size_t)>& fn);

/// One DetectionResult per input point. Points before index window-1 are
/// warm-up and reported as not-anomaly with score 0; gap-filled points keep
/// their score but are never flagged.
std::vector<DetectionResult> detect_stream(const TimeSeries& series, const SrConfig& cfg);

}  // namespace srdetect
