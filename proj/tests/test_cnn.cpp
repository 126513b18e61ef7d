#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "srdetect/cnn.hpp"
#include "srdetect/synth.hpp"

using namespace srdetect;

namespace {

// Direct-convolution oracle: both layers use filter size equal to the input
// window, so valid convolution collapses each to a single dot product per
// output channel. Written straight from that definition.
double naive_forward(const CnnModel& m, const std::vector<double>& input) {
  const std::size_t w = m.window;
  auto relu = [](double v) { return v > 0 ? v : 0.0; };
  std::vector<double> c1(w);
  for (std::size_t ch = 0; ch < w; ++ch) {
    double acc = m.conv1_b[ch];
    for (std::size_t t = 0; t < w; ++t) acc += m.conv1_w[ch * w + t] * input[t];
    c1[ch] = relu(acc);
  }
  std::vector<double> c2(2 * w);
  for (std::size_t ch = 0; ch < 2 * w; ++ch) {
    double acc = m.conv2_b[ch];
    for (std::size_t t = 0; t < w; ++t) acc += m.conv2_w[ch * w + t] * c1[t];
    c2[ch] = relu(acc);
  }
  std::vector<double> f1(w);
  for (std::size_t j = 0; j < w; ++j) {
    double acc = m.fc1_b[j];
    for (std::size_t t = 0; t < 2 * w; ++t) acc += m.fc1_w[j * 2 * w + t] * c2[t];
    f1[j] = relu(acc);
  }
  double z = m.fc2_b[0];
  for (std::size_t t = 0; t < w; ++t) z += m.fc2_w[t] * f1[t];
  return 1.0 / (1.0 + std::exp(-z));
}

std::vector<double> random_window(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

// Separable fixture: positive windows carry a large spike at the target
// position, negatives are flat noise.
TrainingSet separable_set(std::size_t window, std::size_t count, uint64_t seed) {
  TrainingSet set;
  set.window = window;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.8, 1.2);
  for (std::size_t i = 0; i < count; ++i) {
    bool positive = i % 4 == 0;
    for (std::size_t t = 0; t < window; ++t) {
      double v = u(rng);
      if (positive && t == window - 6) v += 25.0;
      set.features.push_back(static_cast<float>(v));
    }
    set.labels.push_back(positive ? 1.0f : 0.0f);
  }
  return set;
}

}  // namespace

TEST_CASE("zero model outputs exactly 0.5") {
  CnnModel m = CnnModel::init(8, 0);
  for (auto* v : {&m.conv1_w, &m.conv2_w, &m.fc1_w, &m.fc2_w}) std::fill(v->begin(), v->end(), 0.0);
  std::mt19937_64 rng(1);
  auto x = random_window(rng, 8);
  CHECK(forward(m, x) == doctest::Approx(0.5));
}

TEST_CASE("forward is deterministic") {
  CnnModel m = CnnModel::init(8, 3);
  std::mt19937_64 rng(2);
  auto x = random_window(rng, 8);
  CHECK(forward(m, x) == forward(m, x));
}

TEST_CASE("forward matches the direct-convolution oracle") {
  std::mt19937_64 rng(4);
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    CnnModel m = CnnModel::init(8, seed);
    auto x = random_window(rng, 8);
    double got = forward(m, x);
    double expect = naive_forward(m, preprocess_window(x));
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
    CHECK(got > 0.0);
    CHECK(got < 1.0);
  }
}

TEST_CASE("window length mismatch is rejected") {
  CnnModel m = CnnModel::init(8, 0);
  std::vector<double> x(7, 1.0);
  CHECK_THROWS_AS(forward(m, x), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  const std::size_t w = 4;
  CnnModel m = CnnModel::init(w, 11);
  std::mt19937_64 rng(12);
  std::vector<std::vector<double>> inputs = {preprocess_window(random_window(rng, w)),
                                             preprocess_window(random_window(rng, w))};
  std::vector<double> labels = {1.0, 0.0};
  const double pw = 1.7;
  const double h = 1e-5;

  CnnGradients grads = CnnGradients::zeros_like(m);
  for (std::size_t s = 0; s < inputs.size(); ++s)
    sample_loss_grad(m, inputs[s], labels[s], pw, grads);

  auto total_loss = [&](const CnnModel& model) {
    double l = 0.0;
    for (std::size_t s = 0; s < inputs.size(); ++s)
      l += sample_loss(model, inputs[s], labels[s], pw);
    return l;
  };

  auto check_params = [&](std::vector<double> CnnModel::* param,
                          std::vector<double> CnnGradients::* grad) {
    auto& vec = m.*param;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      CnnModel plus = m, minus = m;
      (plus.*param)[i] += h;
      (minus.*param)[i] -= h;
      double fd = (total_loss(plus) - total_loss(minus)) / (2 * h);
      double an = (grads.*grad)[i];
      double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
      CHECK(rel < 1e-4);
    }
  };
  check_params(&CnnModel::conv1_w, &CnnGradients::conv1_w);
  check_params(&CnnModel::conv1_b, &CnnGradients::conv1_b);
  check_params(&CnnModel::conv2_w, &CnnGradients::conv2_w);
  check_params(&CnnModel::conv2_b, &CnnGradients::conv2_b);
  check_params(&CnnModel::fc1_w, &CnnGradients::fc1_w);
  check_params(&CnnModel::fc1_b, &CnnGradients::fc1_b);
  check_params(&CnnModel::fc2_w, &CnnGradients::fc2_w);
  check_params(&CnnModel::fc2_b, &CnnGradients::fc2_b);
}

TEST_CASE("training on a separable fixture reaches 95% accuracy") {
  auto set = separable_set(16, 400, 5);
  TrainConfig tcfg;
  tcfg.epochs = 40;
  tcfg.learning_rate = 0.05;
  tcfg.seed = 3;
  tcfg.positive_weight = 3.0;
  TrainStats stats;
  CnnModel m = train(set, tcfg, &stats);
  CHECK(stats.epoch_loss.back() < stats.epoch_loss.front());

  std::size_t correct = 0;
  std::vector<double> buf(set.window);
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto row = set.row(i);
    for (std::size_t t = 0; t < set.window; ++t) buf[t] = row[t];
    double p = forward(m, buf);
    correct += ((p > 0.5) == (set.labels[i] == 1.0f));
  }
  CHECK(static_cast<double>(correct) / set.size() >= 0.95);
}

TEST_CASE("zero learning rate leaves the weights unchanged") {
  auto set = separable_set(8, 64, 1);
  TrainConfig tcfg;
  tcfg.learning_rate = 0.0;
  tcfg.epochs = 3;
  tcfg.seed = 9;
  TrainStats stats;
  CnnModel m = train(set, tcfg, &stats);
  CnnModel fresh = CnnModel::init(8, tcfg.seed);
  CHECK(m.conv1_w == fresh.conv1_w);
  CHECK(m.fc2_w == fresh.fc2_w);
  CHECK(stats.epoch_loss.front() == doctest::Approx(stats.epoch_loss.back()));
}

TEST_CASE("single-class dataset is rejected") {
  TrainingSet set;
  set.window = 4;
  for (int i = 0; i < 8; ++i) {
    for (int t = 0; t < 4; ++t) set.features.push_back(1.0f);
    set.labels.push_back(0.0f);
  }
  CHECK_THROWS_AS(train(set, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("detect_cnn bounds and determinism") {
  SrConfig cfg = SrConfig::defaults_for(Granularity::Hour);
  CnnModel m = CnnModel::init(cfg.window, 7);
  auto series = generate_base(SeriesClass::Stable, 3 * cfg.window, 2, Granularity::Hour);

  SUBCASE("threshold 1.0 flags nothing") {
    auto results = detect_cnn(series, m, cfg, 1.0);
    for (const auto& r : results) CHECK_FALSE(r.is_anomaly);
  }
  SUBCASE("scores are probabilities and runs are identical") {
    auto a = detect_cnn(series, m, cfg, 0.5);
    auto b = detect_cnn(series, m, cfg, 0.5);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].score >= 0.0);
      CHECK(a[i].score <= 1.0);
      CHECK(a[i].score == b[i].score);
    }
  }
}

TEST_CASE("model disk round trip is bit-exact") {
  CnnModel m = CnnModel::init(12, 99);
  auto path = (std::filesystem::temp_directory_path() / "srdetect_model.bin").string();
  save_model(m, path);
  CnnModel loaded = load_model(path);
  CHECK(loaded.window == m.window);
  CHECK(loaded.conv1_w == m.conv1_w);
  CHECK(loaded.conv1_b == m.conv1_b);
  CHECK(loaded.conv2_w == m.conv2_w);
  CHECK(loaded.conv2_b == m.conv2_b);
  CHECK(loaded.fc1_w == m.fc1_w);
  CHECK(loaded.fc1_b == m.fc1_b);
  CHECK(loaded.fc2_w == m.fc2_w);
  CHECK(loaded.fc2_b == m.fc2_b);
  std::filesystem::remove(path);
}

TEST_CASE("truncated and mismatched model files are rejected") {
  CnnModel m = CnnModel::init(6, 1);
  auto dir = std::filesystem::temp_directory_path();
  auto good = (dir / "srdetect_model_good.bin").string();
  save_model(m, good);

  SUBCASE("truncated file") {
    auto bad = (dir / "srdetect_model_trunc.bin").string();
    std::ifstream in(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(bad, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("corrupt"), std::runtime_error);
    std::filesystem::remove(bad);
  }
  SUBCASE("wrong magic") {
    auto bad = (dir / "srdetect_model_magic.bin").string();
    std::ofstream out(bad, std::ios::binary);
    out << "NOPE0000000000000000";
    out.close();
    CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("not a model file"),
                         std::runtime_error);
    std::filesystem::remove(bad);
  }
  SUBCASE("wrong version") {
    std::ifstream in(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
    bytes[4] = 42;  // version field
    auto bad = (dir / "srdetect_model_ver.bin").string();
    std::ofstream out(bad, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("version"), std::runtime_error);
    std::filesystem::remove(bad);
  }
  std::filesystem::remove(good);
}
