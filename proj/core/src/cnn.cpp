#include "srdetect/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace srdetect {

namespace {

constexpr double kProbClamp = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double relu(double z) { return z > 0.0 ? z : 0.0; }
double relu_grad(double z) { return z > 0.0 ? 1.0 : 0.0; }

// out[j] = sum_k W[j*in_dim + k] * x[k] + b[j]
void dense(const std::vector<double>& w, const std::vector<double>& b,
           std::span<const double> x, std::vector<double>& out) {
  const std::size_t out_dim = b.size();
  const std::size_t in_dim = x.size();
  out.resize(out_dim);
  for (std::size_t j = 0; j < out_dim; ++j) {
    double acc = b[j];
    const double* row = w.data() + j * in_dim;
    for (std::size_t k = 0; k < in_dim; ++k) acc += row[k] * x[k];
    out[j] = acc;
  }
}

struct Activations {
  std::vector<double> z1, a1, z2, a2, z3, a3;
  double z4 = 0.0, p = 0.0;
};

void run_forward(const CnnModel& m, std::span<const double> x, Activations& act) {
  dense(m.conv1_w, m.conv1_b, x, act.z1);
  act.a1.resize(act.z1.size());
  std::transform(act.z1.begin(), act.z1.end(), act.a1.begin(), relu);
  dense(m.conv2_w, m.conv2_b, act.a1, act.z2);
  act.a2.resize(act.z2.size());
  std::transform(act.z2.begin(), act.z2.end(), act.a2.begin(), relu);
  dense(m.fc1_w, m.fc1_b, act.a2, act.z3);
  act.a3.resize(act.z3.size());
  std::transform(act.z3.begin(), act.z3.end(), act.a3.begin(), relu);
  double acc = m.fc2_b[0];
  for (std::size_t k = 0; k < act.a3.size(); ++k) acc += m.fc2_w[k] * act.a3[k];
  act.z4 = acc;
  act.p = sigmoid(acc);
}

double weighted_ce(double p, double label, double positive_weight) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(positive_weight * label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

}  // namespace

CnnModel CnnModel::init(std::size_t window, uint64_t seed) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  CnnModel m;
  m.window = window;
  const std::size_t w = window;
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t count, std::size_t fan_in) {
    const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    v.resize(count);
    // Generated as f32 so disk round trips are bit-exact.
    for (auto& x : v) x = static_cast<float>(u(rng));
  };
  fill(m.conv1_w, w * w, w);
  m.conv1_b.assign(w, 0.0);
  fill(m.conv2_w, 2 * w * w, w);
  m.conv2_b.assign(2 * w, 0.0);
  fill(m.fc1_w, w * 2 * w, 2 * w);
  m.fc1_b.assign(w, 0.0);
  fill(m.fc2_w, w, w);
  m.fc2_b.assign(1, 0.0);
  return m;
}

void CnnModel::validate() const {
  const std::size_t w = window;
  if (w == 0) throw std::invalid_argument("model window must be positive");
  if (conv1_b.size() != w || conv1_w.size() != w * w || conv2_b.size() != 2 * w ||
      conv2_w.size() != 2 * w * w || fc1_b.size() != w || fc1_w.size() != w * 2 * w ||
      fc2_b.size() != 1 || fc2_w.size() != w)
    throw std::invalid_argument("model weight shapes inconsistent with window");
  if (conv2_b.size() != 2 * conv1_b.size())
    throw std::invalid_argument("conv2 channel size must double conv1");
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  for (const auto* v : {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b})
    if (!finite(*v)) throw std::invalid_argument("non-finite model weight");
}

std::size_t CnnModel::parameter_count() const {
  return conv1_w.size() + conv1_b.size() + conv2_w.size() + conv2_b.size() + fc1_w.size() +
         fc1_b.size() + fc2_w.size() + fc2_b.size();
}

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (positive_weight <= 0.0) throw std::invalid_argument("positive_weight must be positive");
}

CnnGradients CnnGradients::zeros_like(const CnnModel& m) {
  CnnGradients g;
  g.conv1_w.assign(m.conv1_w.size(), 0.0);
  g.conv1_b.assign(m.conv1_b.size(), 0.0);
  g.conv2_w.assign(m.conv2_w.size(), 0.0);
  g.conv2_b.assign(m.conv2_b.size(), 0.0);
  g.fc1_w.assign(m.fc1_w.size(), 0.0);
  g.fc1_b.assign(m.fc1_b.size(), 0.0);
  g.fc2_w.assign(m.fc2_w.size(), 0.0);
  g.fc2_b.assign(m.fc2_b.size(), 0.0);
  return g;
}

void CnnGradients::accumulate(const CnnGradients& other) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(conv1_w, other.conv1_w);
  add(conv1_b, other.conv1_b);
  add(conv2_w, other.conv2_w);
  add(conv2_b, other.conv2_b);
  add(fc1_w, other.fc1_w);
  add(fc1_b, other.fc1_b);
  add(fc2_w, other.fc2_w);
  add(fc2_b, other.fc2_b);
}

void CnnGradients::scale(double s) {
  for (auto* v : {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b})
    for (auto& x : *v) x *= s;
}

std::vector<double> preprocess_window(std::span<const double> saliency) {
  double mean = 0.0;
  for (double v : saliency) mean += v;
  mean /= static_cast<double>(saliency.size());
  const double denom = std::max(mean, 1e-8);
  std::vector<double> out(saliency.size());
  for (std::size_t i = 0; i < saliency.size(); ++i) out[i] = saliency[i] / denom - 1.0;
  return out;
}

double forward(const CnnModel& model, std::span<const double> saliency_window) {
  if (saliency_window.size() != model.window)
    throw std::invalid_argument("window length does not match model");
  auto x = preprocess_window(saliency_window);
  Activations act;
  run_forward(model, x, act);
  return act.p;
}

double sample_loss(const CnnModel& model, std::span<const double> input, double label,
                   double positive_weight) {
  if (input.size() != model.window)
    throw std::invalid_argument("input length does not match model");
  Activations act;
  run_forward(model, input, act);
  return weighted_ce(act.p, label, positive_weight);
}

double sample_loss_grad(const CnnModel& model, std::span<const double> input, double label,
                        double positive_weight, CnnGradients& grads) {
  if (input.size() != model.window)
    throw std::invalid_argument("input length does not match model");
  const std::size_t w = model.window;
  Activations act;
  run_forward(model, input, act);
  const double loss = weighted_ce(act.p, label, positive_weight);

  const double p = std::clamp(act.p, kProbClamp, 1.0 - kProbClamp);
  const double delta4 = positive_weight * label * (p - 1.0) + (1.0 - label) * p;

  for (std::size_t k = 0; k < w; ++k) grads.fc2_w[k] += delta4 * act.a3[k];
  grads.fc2_b[0] += delta4;

  std::vector<double> delta3(w);
  for (std::size_t j = 0; j < w; ++j)
    delta3[j] = delta4 * model.fc2_w[j] * relu_grad(act.z3[j]);
  for (std::size_t j = 0; j < w; ++j) {
    grads.fc1_b[j] += delta3[j];
    double* row = grads.fc1_w.data() + j * 2 * w;
    for (std::size_t k = 0; k < 2 * w; ++k) row[k] += delta3[j] * act.a2[k];
  }

  std::vector<double> delta2(2 * w, 0.0);
  for (std::size_t j = 0; j < w; ++j) {
    const double* row = model.fc1_w.data() + j * 2 * w;
    for (std::size_t k = 0; k < 2 * w; ++k) delta2[k] += delta3[j] * row[k];
  }
  for (std::size_t k = 0; k < 2 * w; ++k) delta2[k] *= relu_grad(act.z2[k]);
  for (std::size_t j = 0; j < 2 * w; ++j) {
    grads.conv2_b[j] += delta2[j];
    double* row = grads.conv2_w.data() + j * w;
    for (std::size_t k = 0; k < w; ++k) row[k] += delta2[j] * act.a1[k];
  }

  std::vector<double> delta1(w, 0.0);
  for (std::size_t j = 0; j < 2 * w; ++j) {
    const double* row = model.conv2_w.data() + j * w;
    for (std::size_t k = 0; k < w; ++k) delta1[k] += delta2[j] * row[k];
  }
  for (std::size_t k = 0; k < w; ++k) delta1[k] *= relu_grad(act.z1[k]);
  for (std::size_t j = 0; j < w; ++j) {
    grads.conv1_b[j] += delta1[j];
    double* row = grads.conv1_w.data() + j * w;
    for (std::size_t k = 0; k < w; ++k) row[k] += delta1[j] * input[k];
  }
  return loss;
}

CnnModel train(const TrainingSet& dataset, const TrainConfig& tcfg, TrainStats* stats) {
  tcfg.validate();
  if (dataset.size() == 0) throw std::invalid_argument("empty training set");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(dataset.labels.begin(), dataset.labels.end(), 1.0f));
  if (positives == 0 || positives == dataset.size())
    throw std::invalid_argument("training set must contain both classes");

  CnnModel model = CnnModel::init(dataset.window, tcfg.seed);
  const std::size_t n = dataset.size();
  const std::size_t w = dataset.window;

  // Preprocess every row once.
  std::vector<double> inputs(n * w);
  std::vector<double> buf(w);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = dataset.row(i);
    for (std::size_t k = 0; k < w; ++k) buf[k] = row[k];
    auto pre = preprocess_window(buf);
    std::copy(pre.begin(), pre.end(), inputs.begin() + static_cast<long>(i * w));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(tcfg.seed ^ 0x5deece66dULL);

  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += tcfg.batch_size) {
      const std::size_t end = std::min(n, start + tcfg.batch_size);
      CnnGradients grads = CnnGradients::zeros_like(model);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        epoch_loss += sample_loss_grad(model, {inputs.data() + i * w, w},
                                       dataset.labels[i], tcfg.positive_weight, grads);
      }
      const double step = tcfg.learning_rate / static_cast<double>(end - start);
      auto update = [&](std::vector<double>& param, const std::vector<double>& g) {
        for (std::size_t k = 0; k < param.size(); ++k) param[k] -= step * g[k];
      };
      update(model.conv1_w, grads.conv1_w);
      update(model.conv1_b, grads.conv1_b);
      update(model.conv2_w, grads.conv2_w);
      update(model.conv2_b, grads.conv2_b);
      update(model.fc1_w, grads.fc1_w);
      update(model.fc1_b, grads.fc1_b);
      update(model.fc2_w, grads.fc2_w);
      update(model.fc2_b, grads.fc2_b);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
    if (stats) stats->epoch_loss.push_back(epoch_loss);
  }
  model.validate();
  return model;
}

std::vector<DetectionResult> detect_cnn(const TimeSeries& series, const CnnModel& model,
                                        const SrConfig& cfg, double decision_threshold) {
  model.validate();
  if (model.window != cfg.window)
    throw std::invalid_argument("model window does not match detector config");
  std::vector<DetectionResult> out(series.size());
  for (std::size_t i = 0; i < series.size() && i < cfg.window - 1; ++i) {
    out[i].index = i;
    out[i].timestamp = series.points[i].timestamp;
  }
  for_each_stream_window(series, cfg,
                         [&](std::size_t i, const SaliencyMap& s, std::size_t) {
                           DetectionResult r;
                           r.index = i;
                           r.timestamp = series.points[i].timestamp;
                           r.score = forward(model, s.values);
                           r.is_anomaly =
                               r.score > decision_threshold && !series.points[i].interpolated;
                           out[i] = r;
                           return r.is_anomaly;
                         });
  return out;
}

namespace {

constexpr char kModelMagic[4] = {'S', 'R', 'C', 'M'};
constexpr uint32_t kModelVersion = 1;

void write_array(std::ofstream& out, const std::vector<double>& v) {
  uint64_t len = v.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  for (double x : v) {
    float f = static_cast<float>(x);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
}

void read_array(std::ifstream& in, std::vector<double>& v, std::size_t expected) {
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw std::runtime_error("corrupt model file: truncated array header");
  if (len != expected)
    throw std::runtime_error("corrupt model file: unexpected array length");
  v.resize(len);
  for (auto& x : v) {
    float f = 0.0f;
    in.read(reinterpret_cast<char*>(&f), sizeof(f));
    if (!in) throw std::runtime_error("corrupt model file: truncated weights");
    x = f;
  }
}

}  // namespace

void save_model(const CnnModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kModelMagic, 4);
  uint32_t version = kModelVersion;
  uint32_t window = static_cast<uint32_t>(model.window);
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&window), sizeof(window));
  for (const auto* v : {&model.conv1_w, &model.conv1_b, &model.conv2_w, &model.conv2_b,
                        &model.fc1_w, &model.fc1_b, &model.fc2_w, &model.fc2_b})
    write_array(out, *v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

CnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw std::runtime_error("not a model file: " + path);
  uint32_t version = 0, window = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&window), sizeof(window));
  if (!in) throw std::runtime_error("corrupt model file: truncated header");
  if (version != kModelVersion)
    throw std::runtime_error("unsupported model version " + std::to_string(version));
  CnnModel m;
  m.window = window;
  m.version = version;
  const std::size_t w = window;
  read_array(in, m.conv1_w, w * w);
  read_array(in, m.conv1_b, w);
  read_array(in, m.conv2_w, 2 * w * w);
  read_array(in, m.conv2_b, 2 * w);
  read_array(in, m.fc1_w, w * 2 * w);
  read_array(in, m.fc1_b, w);
  read_array(in, m.fc2_w, w);
  read_array(in, m.fc2_b, 1);
  m.validate();
  return m;
}

}  // namespace srdetect
