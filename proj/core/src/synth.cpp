#include "srdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "srdetect/detector.hpp"

namespace srdetect {

void InjectionParams::validate() const {
  if (ratio < 0.0 || ratio >= 0.5) throw std::invalid_argument("ratio must be in [0, 0.5)");
  if (local_window == 0) throw std::invalid_argument("local_window must be positive");
  if (r_abs_min < 0.0 || r_abs_max <= r_abs_min)
    throw std::invalid_argument("invalid r magnitude band");
}

double injection_value(std::span<const double> window, std::size_t local_window, double r) {
  if (window.empty()) throw std::invalid_argument("empty window");
  const std::size_t w = window.size();
  const double x = window[w - 1];

  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (double v : window) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w);

  const std::size_t lw = std::min(local_window, w - 1);
  double xbar = x;  // degenerate single-point window
  if (lw > 0) {
    xbar = 0.0;
    for (std::size_t j = w - 1 - lw; j < w - 1; ++j) xbar += window[j];
    xbar /= static_cast<double>(lw);
  }
  return (xbar + mean) * (1.0 + var) * r + x;
}

namespace {

double draw_r(std::mt19937_64& rng, const InjectionParams& p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double r = normal(rng);
    double a = std::abs(r);
    if (a >= p.r_abs_min && a <= p.r_abs_max) return r;
  }
  throw std::runtime_error("could not sample r within the magnitude band");
}

}  // namespace

std::pair<TimeSeries, std::vector<std::size_t>> inject(const TimeSeries& series,
                                                       const InjectionParams& params,
                                                       const SrConfig& cfg) {
  params.validate();
  cfg.validate();
  const std::size_t n = series.size();
  const std::size_t omega = cfg.window;
  if (n < omega) throw std::invalid_argument("series shorter than the sliding window");

  const std::size_t count = static_cast<std::size_t>(std::ceil(params.ratio * static_cast<double>(n)));
  std::mt19937_64 rng(params.seed);

  std::vector<std::size_t> chosen;
  if (count > 0) {
    std::uniform_int_distribution<std::size_t> pick(omega - 1, n - 1);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * count + 10000;
    while (chosen.size() < count) {
      if (++attempts > max_attempts)
        throw std::runtime_error("cannot place injections with minimum spacing; lower ratio");
      std::size_t idx = pick(rng);
      bool ok = true;
      for (std::size_t c : chosen) {
        std::size_t d = idx > c ? idx - c : c - idx;
        if (d < omega) {
          ok = false;
          break;
        }
      }
      if (ok) chosen.push_back(idx);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  TimeSeries out = series;
  for (auto& p : out.points) p.label = false;
  std::vector<double> vals = series.values();
  for (std::size_t idx : chosen) {
    const double r = draw_r(rng, params);
    std::span<const double> win(vals.data() + idx + 1 - omega, omega);
    out.points[idx].value = injection_value(win, params.local_window, r);
    out.points[idx].label = true;
  }
  return {std::move(out), std::move(chosen)};
}

TimeSeries generate_base(SeriesClass kind, std::size_t n, uint64_t seed, Granularity g,
                         const BaseParams& p) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  TimeSeries out;
  out.id = to_string(kind) + "-" + std::to_string(seed);
  out.granularity = g;
  out.class_tag = kind;
  out.points.resize(n);

  const int64_t step = granularity_seconds(g);
  double walk = p.level;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (kind) {
      case SeriesClass::Seasonal:
        v = p.level +
            p.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(p.period)) +
            p.noise * normal(rng);
        break;
      case SeriesClass::Stable:
        v = p.level + p.noise * normal(rng);
        break;
      case SeriesClass::Unstable:
        if (i > 0) walk += p.step * normal(rng);
        v = walk;
        break;
    }
    out.points[i] = {static_cast<int64_t>(i) * step, v, false, false};
  }
  return out;
}

TrainingSet build_training_set(const std::vector<TimeSeries>& sources,
                               const InjectionParams& params, const SrConfig& cfg) {
  cfg.validate();
  TrainingSet set;
  set.window = cfg.window;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    InjectionParams per = params;
    per.seed = params.seed + s;  // independent stream per source
    auto [labeled, idxs] = inject(sources[s], per, cfg);
    for_each_stream_window(labeled, cfg,
                           [&](std::size_t i, const SaliencyMap& sal, std::size_t) {
                             for (double v : sal.values)
                               set.features.push_back(static_cast<float>(v));
                             set.labels.push_back(labeled.points[i].label.value() ? 1.0f : 0.0f);
                             // Hide known injections from later windows, same
                             // as the detector hides what it flags.
                             return set.labels.back() == 1.0f;
                           });
  }
  return set;
}

namespace {

constexpr char kTrainMagic[4] = {'S', 'R', 'T', 'S'};
constexpr uint32_t kTrainVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v, const std::string& what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("corrupt training set file: truncated " + what);
}

}  // namespace

void save_training_set(const TrainingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kTrainMagic, 4);
  write_raw(out, kTrainVersion);
  write_raw(out, static_cast<uint32_t>(set.window));
  write_raw(out, static_cast<uint64_t>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    out.write(reinterpret_cast<const char*>(set.features.data() + i * set.window),
              static_cast<std::streamsize>(set.window * sizeof(float)));
    write_raw(out, set.labels[i]);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrainingSet load_training_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTrainMagic, 4) != 0)
    throw std::runtime_error("not a training set file: " + path);
  uint32_t version = 0, window = 0;
  uint64_t count = 0;
  read_raw(in, version, "version");
  if (version != kTrainVersion)
    throw std::runtime_error("unsupported training set version " + std::to_string(version));
  read_raw(in, window, "window");
  read_raw(in, count, "count");
  TrainingSet set;
  set.window = window;
  set.features.resize(static_cast<std::size_t>(count) * window);
  set.labels.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(set.features.data() + i * window),
            static_cast<std::streamsize>(window * sizeof(float)));
    if (!in) throw std::runtime_error("corrupt training set file: truncated row");
    read_raw(in, set.labels[i], "label");
  }
  return set;
}

}  // namespace srdetect
