#include "srdetect/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

namespace srdetect {

std::vector<uint8_t> adjust(const std::vector<uint8_t>& truth, const std::vector<uint8_t>& pred,
                            std::size_t k) {
  if (truth.size() != pred.size()) throw std::invalid_argument("truth/pred length mismatch");
  const std::size_t n = truth.size();
  std::vector<uint8_t> out(pred);
  std::size_t i = 0;
  while (i < n) {
    if (!truth[i]) {
      ++i;
      continue;
    }
    std::size_t s = i;
    std::size_t e = s;
    while (e + 1 < n && truth[e + 1]) ++e;
    const std::size_t deadline = std::min(e, s + k);
    bool detected = false;
    for (std::size_t j = s; j <= deadline; ++j)
      if (pred[j]) {
        detected = true;
        break;
      }
    for (std::size_t j = s; j <= e; ++j) out[j] = detected ? 1 : 0;
    i = e + 1;
  }
  return out;
}

namespace {

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0;

  void add(const std::vector<uint8_t>& truth, const std::vector<uint8_t>& adjusted) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (adjusted[i] && truth[i])
        ++tp;
      else if (adjusted[i] && !truth[i])
        ++fp;
      else if (!adjusted[i] && truth[i])
        ++fn;
    }
  }
  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

}  // namespace

EvalReport score(const std::vector<uint8_t>& truth, const std::vector<uint8_t>& pred,
                 std::size_t k) {
  auto adjusted = adjust(truth, pred, k);
  Confusion c;
  c.add(truth, adjusted);
  EvalReport r;
  r.precision = c.precision();
  r.recall = c.recall();
  r.f1 = c.f1();
  r.total_points = truth.size();
  return r;
}

EvalReport evaluate_detector(const DetectorFn& detector, const std::vector<TimeSeries>& dataset,
                             std::optional<std::size_t> delay_k, std::size_t threads) {
  for (const auto& s : dataset)
    if (!s.labeled()) throw std::invalid_argument("series '" + s.id + "' is not fully labeled");

  std::vector<std::vector<DetectionResult>> results(dataset.size());
  const auto t0 = std::chrono::steady_clock::now();
  if (threads <= 1 || dataset.size() <= 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) results[i] = detector(dataset[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= dataset.size()) break;
        results[i] = detector(dataset[i]);
      }
    };
    std::vector<std::future<void>> futs;
    for (std::size_t t = 0; t < std::min(threads, dataset.size()); ++t)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }
  const auto t1 = std::chrono::steady_clock::now();

  Confusion pooled;
  std::map<std::string, Confusion> per_class;
  std::size_t total_points = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    const std::size_t k = delay_k.value_or(default_delay(s.granularity));
    std::vector<uint8_t> truth(s.size()), pred(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      truth[j] = *s.points[j].label ? 1 : 0;
      pred[j] = results[i][j].is_anomaly ? 1 : 0;
    }
    auto adjusted = adjust(truth, pred, k);
    pooled.add(truth, adjusted);
    if (s.class_tag) per_class[to_string(*s.class_tag)].add(truth, adjusted);
    total_points += s.size();
  }

  EvalReport r;
  r.precision = pooled.precision();
  r.recall = pooled.recall();
  r.f1 = pooled.f1();
  r.total_points = total_points;
  r.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (!per_class.empty()) {
    double sum = 0.0;
    for (const auto& [name, c] : per_class) {
      r.per_class[name] = c.f1();
      sum += c.f1();
    }
    const double mean = sum / static_cast<double>(per_class.size());
    double var = 0.0;
    for (const auto& [name, f1] : r.per_class) var += (f1 - mean) * (f1 - mean);
    r.class_std = std::sqrt(var / static_cast<double>(per_class.size()));
  }
  return r;
}

}  // namespace srdetect
