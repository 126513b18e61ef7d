#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "srdetect/detector.hpp"
#include "srdetect/synth.hpp"

using namespace srdetect;

namespace {

SrConfig hour_cfg() { return SrConfig::defaults_for(Granularity::Hour); }

}  // namespace

TEST_CASE("injection kernel hand cases") {
  SUBCASE("r = 0 degenerates to the original value") {
    std::vector<double> win = {1.0, 5.0, 2.0, 8.0};
    CHECK(injection_value(win, 21, 0.0) == doctest::Approx(8.0));
  }
  SUBCASE("constant window with r = 1 gives 3c") {
    for (double c : {1.0, 2.5, -4.0}) {
      std::vector<double> win(32, c);
      CHECK(injection_value(win, 21, 1.0) == doctest::Approx(3.0 * c));
    }
  }
}

TEST_CASE("fixed seed injects a reproducible set of indices") {
  auto cfg = hour_cfg();
  auto base = generate_base(SeriesClass::Seasonal, 1000, 3, Granularity::Hour);
  InjectionParams params;
  params.ratio = 0.01;
  params.seed = 7;

  auto [a, idx_a] = inject(base, params, cfg);
  auto [b, idx_b] = inject(base, params, cfg);
  CHECK(idx_a.size() == 10);  // ceil(0.01 * 1000)
  CHECK(idx_a == idx_b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.value(i) == b.value(i));

  std::size_t labeled = 0;
  for (const auto& p : a.points) labeled += *p.label;
  CHECK(labeled == 10);
}

TEST_CASE("injection touches only the selected indices") {
  auto cfg = hour_cfg();
  auto base = generate_base(SeriesClass::Stable, 600, 11, Granularity::Hour);
  InjectionParams params;
  params.ratio = 0.005;
  params.seed = 2;
  auto [out, idxs] = inject(base, params, cfg);
  std::vector<bool> is_injected(base.size(), false);
  for (std::size_t i : idxs) is_injected[i] = true;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (is_injected[i]) {
      CHECK(*out.points[i].label);
    } else {
      CHECK(out.value(i) == base.value(i));  // bit-identical
      CHECK_FALSE(*out.points[i].label);
    }
  }
}

TEST_CASE("injected indices keep minimum spacing and are scoreable") {
  auto cfg = hour_cfg();
  auto base = generate_base(SeriesClass::Seasonal, 2000, 23, Granularity::Hour);
  InjectionParams params;
  params.ratio = 0.005;
  params.seed = 9;
  auto [out, idxs] = inject(base, params, cfg);
  for (std::size_t i = 0; i < idxs.size(); ++i) {
    CHECK(idxs[i] >= cfg.window - 1);
    if (i > 0) CHECK(idxs[i] - idxs[i - 1] >= cfg.window);
  }
}

TEST_CASE("ratio out of range is rejected") {
  InjectionParams params;
  params.ratio = 0.6;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("base generators") {
  SUBCASE("stable with zero noise is constant") {
    BaseParams p;
    p.noise = 0.0;
    auto ts = generate_base(SeriesClass::Stable, 200, 1, Granularity::Hour, p);
    for (const auto& pt : ts.points) CHECK(pt.value == doctest::Approx(p.level));
    CHECK(ts.class_tag == SeriesClass::Stable);
  }
  SUBCASE("seasonal autocorrelation peaks at the period") {
    BaseParams p;
    p.period = 24;
    auto ts = generate_base(SeriesClass::Seasonal, 2400, 5, Granularity::Hour, p);
    auto vals = ts.values();
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    auto autocorr = [&](std::size_t lag) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i + lag < vals.size(); ++i)
        num += (vals[i] - mean) * (vals[i + lag] - mean);
      for (double v : vals) den += (v - mean) * (v - mean);
      return num / den;
    };
    CHECK(autocorr(p.period) > autocorr(p.period / 2));
  }
  SUBCASE("same seed twice is identical") {
    auto a = generate_base(SeriesClass::Unstable, 500, 42, Granularity::Day);
    auto b = generate_base(SeriesClass::Unstable, 500, 42, Granularity::Day);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.value(i) == b.value(i));
  }
}

TEST_CASE("training set construction") {
  auto cfg = hour_cfg();

  SUBCASE("ratio 0 gives all-zero labels") {
    auto src = generate_base(SeriesClass::Stable, 3 * cfg.window, 1, Granularity::Hour);
    InjectionParams params;
    params.ratio = 0.0;
    auto set = build_training_set({src}, params, cfg);
    CHECK(set.size() == src.size() - cfg.window + 1);
    for (float l : set.labels) CHECK(l == 0.0f);
  }

  SUBCASE("positive windows match the injected indices exactly") {
    auto src = generate_base(SeriesClass::Seasonal, 2000, 6, Granularity::Hour);
    InjectionParams params;
    params.ratio = 0.0025;  // 5 injections in 2000 points
    params.seed = 8;
    auto set = build_training_set({src}, params, cfg);
    std::size_t positives = 0;
    for (float l : set.labels) positives += (l == 1.0f);
    CHECK(positives == 5);
  }

  SUBCASE("pair count sums n_i - window + 1 over sources") {
    std::vector<TimeSeries> sources = {
        generate_base(SeriesClass::Stable, 300, 1, Granularity::Hour),
        generate_base(SeriesClass::Seasonal, 500, 2, Granularity::Hour)};
    InjectionParams params;
    params.ratio = 0.01;
    auto set = build_training_set(sources, params, cfg);
    CHECK(set.size() == (300 - cfg.window + 1) + (500 - cfg.window + 1));
    CHECK(set.features.size() == set.size() * cfg.window);
  }
}

TEST_CASE("training set disk round trip") {
  auto cfg = hour_cfg();
  auto src = generate_base(SeriesClass::Seasonal, 400, 12, Granularity::Hour);
  InjectionParams params;
  params.ratio = 0.005;
  auto set = build_training_set({src}, params, cfg);

  auto path = (std::filesystem::temp_directory_path() / "srdetect_train.bin").string();
  save_training_set(set, path);
  auto loaded = load_training_set(path);
  CHECK(loaded.window == set.window);
  CHECK(loaded.features == set.features);
  CHECK(loaded.labels == set.labels);
  std::filesystem::remove(path);
}
