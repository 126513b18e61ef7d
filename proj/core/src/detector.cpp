#include "srdetect/detector.hpp"

#include <algorithm>
#include <stdexcept>

namespace srdetect {

DetectionResult threshold_decide(const SaliencyMap& s, std::size_t i, const SrConfig& cfg) {
  if (i >= s.values.size()) throw std::out_of_range("saliency index out of range");
  DetectionResult r;
  r.index = i;
  if (i == 0) return r;  // no preceding points: score 0, not an anomaly

  const std::size_t z = std::min<std::size_t>(cfg.score_window, i);
  double sum = 0.0;
  for (std::size_t j = i - z; j < i; ++j) sum += s.values[j];
  const double local_avg = sum / static_cast<double>(z);
  const double denom = std::max(local_avg, cfg.log_epsilon);
  r.score = (s.values[i] - local_avg) / denom;
  r.is_anomaly = r.score > cfg.threshold;
  return r;
}

std::vector<double> estimate_tail(std::span<const double> x, const SrConfig& cfg) {
  const std::size_t m = cfg.gradient_points;
  if (x.size() < m + 1)
    throw std::invalid_argument("need at least m+1 points to estimate the tail");
  const std::size_t last = x.size() - 1;
  double grad_sum = 0.0;
  for (std::size_t i = 1; i <= m; ++i)
    grad_sum += (x[last] - x[last - i]) / static_cast<double>(i);
  const double avg_grad = grad_sum / static_cast<double>(m);
  const double next = x[last - m + 1] + avg_grad * static_cast<double>(m);
  return std::vector<double>(cfg.estimated_points, next);
}

void for_each_stream_window(
    const TimeSeries& series, const SrConfig& cfg,
    const std::function<bool(std::size_t, const SaliencyMap&, std::size_t)>& fn) {
  cfg.validate();
  const std::size_t n = series.size();
  const std::size_t omega = cfg.window;
  if (n < omega) throw std::invalid_argument("series shorter than the sliding window");

  const std::size_t real_len = omega - cfg.estimated_points;
  const std::size_t target_pos = real_len - 1;
  const std::size_t m = cfg.gradient_points;
  std::vector<uint8_t> flagged(n, 0);
  std::vector<double> extended(omega);
  std::vector<double> base(m + 1);
  for (std::size_t i = omega - 1; i < n; ++i) {
    for (std::size_t j = 0; j < real_len; ++j)
      extended[j] = series.value(i - real_len + 1 + j);
    // Predict the tail from the most recent points before the target that the
    // caller has not flagged: the gradient estimate is anchored at its last
    // point, so one outlier in the base would drag the estimated points far
    // off and distort the next few windows.
    std::size_t have = 0;
    for (std::size_t j = i; j-- > 0 && have < m + 1;)
      if (!flagged[j]) base[m - have++] = series.value(j);
    if (have < m + 1)  // dense flagging: fall back to the raw history
      for (std::size_t j = 0; j < m + 1; ++j) base[j] = series.value(i - m - 1 + j);
    auto tail = estimate_tail(base, cfg);
    std::copy(tail.begin(), tail.end(), extended.begin() + static_cast<long>(real_len));
    auto [decomp, saliency] = spectral_residual(extended, cfg);
    if (fn(i, saliency, target_pos)) flagged[i] = 1;
  }
}

std::vector<DetectionResult> detect_stream(const TimeSeries& series, const SrConfig& cfg) {
  std::vector<DetectionResult> out(series.size());
  for (std::size_t i = 0; i < series.size() && i < cfg.window - 1; ++i) {
    out[i].index = i;
    out[i].timestamp = series.points[i].timestamp;
  }
  for_each_stream_window(series, cfg,
                         [&](std::size_t i, const SaliencyMap& s, std::size_t target) {
                           DetectionResult r = threshold_decide(s, target, cfg);
                           r.index = i;
                           r.timestamp = series.points[i].timestamp;
                           if (series.points[i].interpolated) r.is_anomaly = false;
                           out[i] = r;
                           return r.is_anomaly;
                         });
  return out;
}

}  // namespace srdetect
