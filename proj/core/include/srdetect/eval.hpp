#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srdetect/detector.hpp"
#include "srdetect/timeseries.hpp"

namespace srdetect {

struct EvalConfig {
  std::size_t delay_k = 7;  // allowed detection delay in points
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, double> per_class;  // class name -> F1
  double class_std = 0.0;                   // std deviation of per-class F1
  std::size_t total_points = 0;
  double wall_time_seconds = 0.0;
};

/// Delay-adjusted credit rule: a maximal contiguous truth segment [s,e] counts
/// as detected only if some prediction falls in [s, min(e, s+k)]; the whole
/// segment is then set to 1 in the adjusted vector, otherwise to 0. Outside
/// segments the predictions pass through unchanged.
std::vector<uint8_t> adjust(const std::vector<uint8_t>& truth, const std::vector<uint8_t>& pred,
                            std::size_t k);

/// Point-wise precision/recall/F1 on the adjusted predictions; zero-division
/// cases yield 0.
EvalReport score(const std::vector<uint8_t>& truth, const std::vector<uint8_t>& pred,
                 std::size_t k);

using DetectorFn = std::function<std::vector<DetectionResult>(const TimeSeries&)>;

/// Runs the streaming detector over every labeled series, pools confusion
/// counts (micro average), fills per-class F1 and its std deviation when class
/// tags exist, and measures wall time around detection only. Delay k defaults
/// per series granularity when not overridden. threads > 1 parallelizes
/// across series with deterministic aggregation order.
EvalReport evaluate_detector(const DetectorFn& detector, const std::vector<TimeSeries>& dataset,
                             std::optional<std::size_t> delay_k = std::nullopt,
                             std::size_t threads = 1);

}  // namespace srdetect
