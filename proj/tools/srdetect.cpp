// srdetect: spectral-residual anomaly detection toolkit CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srdetect/cnn.hpp"
#include "srdetect/config.hpp"
#include "srdetect/detector.hpp"
#include "srdetect/eval.hpp"
#include "srdetect/synth.hpp"
#include "srdetect/timeseries.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitBadConfig = 4;

using namespace srdetect;

class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const std::string& p) : std::runtime_error("no such file: " + p) {}
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw MissingFile(path);
}

TimeSeries load_series(const std::string& path, Granularity g) {
  require_file(path);
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
    return ingest_json(path, g);
  return ingest_csv(path, g);
}

void write_results(const std::vector<DetectionResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "index,timestamp,score,is_anomaly\n";
  out.precision(17);
  for (const auto& r : results)
    out << r.index << ',' << r.timestamp << ',' << r.score << ',' << (r.is_anomaly ? 1 : 0)
        << '\n';
}

struct CommonArgs {
  std::string input, output, config_path, granularity = "minute";
  uint64_t seed = 0;
};

AppConfig load_config(const std::string& path, Granularity g) {
  AppConfig cfg;
  cfg.sr = SrConfig::defaults_for(g);
  if (!path.empty()) {
    require_file(path);
    // File values override the granularity defaults wholesale.
    cfg = AppConfig::from_file(path);
  }
  return cfg;
}

int cmd_detect(const CommonArgs& a, std::size_t window_override, double threshold_override) {
  Granularity g = granularity_from_string(a.granularity);
  AppConfig cfg = load_config(a.config_path, g);
  if (window_override > 0) cfg.sr.window = window_override;
  if (threshold_override > 0.0) cfg.sr.threshold = threshold_override;
  cfg.sr.validate();

  TimeSeries series = load_series(a.input, g);
  auto results = detect_stream(series, cfg.sr);
  write_results(results, a.output);
  std::size_t flagged = 0;
  for (const auto& r : results) flagged += r.is_anomaly;
  std::cerr << "detected " << flagged << " anomalies over " << results.size() << " points\n";
  return kExitOk;
}

int cmd_detect_cnn(const CommonArgs& a, const std::string& model_path, double decision_threshold,
                   std::size_t window_override) {
  Granularity g = granularity_from_string(a.granularity);
  AppConfig cfg = load_config(a.config_path, g);
  require_file(model_path);
  CnnModel model = load_model(model_path);
  cfg.sr.window = window_override > 0 ? window_override : model.window;
  cfg.sr.validate();

  TimeSeries series = load_series(a.input, g);
  auto results = detect_cnn(series, model, cfg.sr, decision_threshold);
  write_results(results, a.output);
  std::size_t flagged = 0;
  for (const auto& r : results) flagged += r.is_anomaly;
  std::cerr << "detected " << flagged << " anomalies over " << results.size() << " points\n";
  return kExitOk;
}

int cmd_inject(const CommonArgs& a, double ratio, std::size_t window_override) {
  Granularity g = granularity_from_string(a.granularity);
  AppConfig cfg = load_config(a.config_path, g);
  if (window_override > 0) cfg.sr.window = window_override;
  cfg.injection.ratio = ratio;
  cfg.injection.seed = a.seed;
  cfg.sr.validate();
  cfg.injection.validate();

  TimeSeries series = load_series(a.input, g);
  auto [labeled, idxs] = inject(series, cfg.injection, cfg.sr);
  write_csv(labeled, a.output);
  std::cerr << "injected " << idxs.size() << " anomalies\n";
  return kExitOk;
}

int cmd_train_cnn(const std::string& data_path, const std::string& config_path,
                  const std::string& out_path, uint64_t seed) {
  require_file(data_path);
  TrainConfig tcfg;
  if (!config_path.empty()) {
    require_file(config_path);
    tcfg = AppConfig::from_file(config_path).train;
  }
  if (seed != 0) tcfg.seed = seed;

  TrainingSet data = load_training_set(data_path);
  TrainStats stats;
  CnnModel model = train(data, tcfg, &stats);
  save_model(model, out_path);
  std::cerr << "trained on " << data.size() << " windows";
  if (!stats.epoch_loss.empty())
    std::cerr << ", loss " << stats.epoch_loss.front() << " -> " << stats.epoch_loss.back();
  std::cerr << '\n';
  return kExitOk;
}

std::vector<uint8_t> read_pred_csv(const std::string& path, std::size_t expected_len) {
  require_file(path);
  std::ifstream in(path);
  std::vector<uint8_t> pred(expected_len, 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("index", 0) == 0) continue;
    std::size_t c1 = line.find(',');
    std::size_t c3 = line.rfind(',');
    if (c1 == std::string::npos || c3 == std::string::npos || c3 <= c1)
      throw ParseError("bad results row", lineno);
    std::size_t idx = std::stoull(line.substr(0, c1));
    int flag = std::stoi(line.substr(c3 + 1));
    if (idx >= expected_len)
      throw ParseError("result index " + std::to_string(idx) + " out of range", lineno);
    pred[idx] = flag ? 1 : 0;
  }
  return pred;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path, long k_flag,
                 const std::string& granularity, const std::string& report_path) {
  Granularity g = granularity_from_string(granularity);
  TimeSeries truth_series = load_series(truth_path, g);
  if (!truth_series.labeled())
    throw std::runtime_error("truth series has unlabeled points: " + truth_path);
  std::size_t k = k_flag >= 0 ? static_cast<std::size_t>(k_flag) : default_delay(g);

  std::vector<uint8_t> truth(truth_series.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth[i] = *truth_series.points[i].label ? 1 : 0;
  auto pred = read_pred_csv(pred_path, truth.size());

  EvalReport r = score(truth, pred, k);
  nlohmann::json j = {{"precision", r.precision}, {"recall", r.recall},     {"f1", r.f1},
                      {"delay_k", k},             {"total_points", r.total_points}};
  if (report_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open " + report_path + " for writing");
    out << j.dump(2) << '\n';
  }
  std::cerr << "f1=" << r.f1 << " precision=" << r.precision << " recall=" << r.recall << '\n';
  return kExitOk;
}

int cmd_bench(std::size_t window, std::size_t points, uint64_t seed) {
  SrConfig cfg;
  cfg.window = window;
  cfg.validate();
  BaseParams bp;
  TimeSeries series =
      generate_base(SeriesClass::Seasonal, points + window, seed, Granularity::Minute, bp);

  std::vector<double> per_point_ms;
  per_point_ms.reserve(points + 1);
  auto last = std::chrono::steady_clock::now();
  const auto t0 = last;
  for_each_stream_window(series, cfg, [&](std::size_t, const SaliencyMap&, std::size_t) {
    auto now = std::chrono::steady_clock::now();
    per_point_ms.push_back(std::chrono::duration<double, std::milli>(now - last).count());
    last = now;
    return false;
  });
  const auto t1 = std::chrono::steady_clock::now();

  std::sort(per_point_ms.begin(), per_point_ms.end());
  auto pct = [&](double q) {
    std::size_t i = static_cast<std::size_t>(q * (per_point_ms.size() - 1));
    return per_point_ms[i];
  };
  const double total_s = std::chrono::duration<double>(t1 - t0).count();
  const double n = static_cast<double>(per_point_ms.size());
  std::cout << "window=" << window << " points=" << per_point_ms.size() << '\n'
            << "throughput=" << n / total_s << " points/s\n"
            << "latency_ms mean=" << total_s * 1000.0 / n << " p50=" << pct(0.50)
            << " p90=" << pct(0.90) << " p99=" << pct(0.99) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming spectral-residual time-series anomaly detection"};
  app.require_subcommand(1);

  CommonArgs common;
  std::size_t window_override = 0;
  double tau_override = 0.0;
  double decision_threshold = 0.5;
  double ratio = 0.01;
  std::string model_path, data_path, out_path, pred_path, truth_path, report_path;
  long k_flag = -1;
  std::size_t bench_points = 100000;
  std::size_t bench_window = 1440;

  auto add_common = [&](CLI::App* sub, bool needs_output) {
    sub->add_option("--input", common.input, "Input series (.csv or .json)")->required();
    if (needs_output)
      sub->add_option("--output", common.output, "Output file")->required();
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--granularity", common.granularity, "minute|hour|day")
        ->check(CLI::IsMember({"minute", "hour", "day"}));
    sub->add_option("--seed", common.seed, "Root random seed");
  };

  auto* detect = app.add_subcommand("detect", "Run the SR threshold detector");
  add_common(detect, true);
  detect->add_option("--window", window_override, "Sliding window size (omega)");
  detect->add_option("--threshold", tau_override, "Anomaly threshold (tau)");

  auto* detect_cnn_cmd = app.add_subcommand("detect-cnn", "Run the SR-CNN detector");
  add_common(detect_cnn_cmd, true);
  detect_cnn_cmd->add_option("--model", model_path, "Trained model file")->required();
  detect_cnn_cmd->add_option("--threshold", decision_threshold, "Decision threshold on the probability");
  detect_cnn_cmd->add_option("--window", window_override, "Sliding window size (omega)");

  auto* inject_cmd = app.add_subcommand("inject", "Inject labeled synthetic anomalies");
  add_common(inject_cmd, true);
  inject_cmd->add_option("--ratio", ratio, "Fraction of points to perturb");
  inject_cmd->add_option("--window", window_override, "Sliding window size (omega)");

  auto* train_cmd = app.add_subcommand("train-cnn", "Train the CNN discriminator");
  train_cmd->add_option("--data", data_path, "Training set (.bin)")->required();
  train_cmd->add_option("--config", common.config_path, "JSON config file");
  train_cmd->add_option("--out", out_path, "Output model file")->required();
  train_cmd->add_option("--seed", common.seed, "Root random seed");

  auto* eval_cmd = app.add_subcommand("evaluate", "Delay-adjusted evaluation of results");
  eval_cmd->add_option("--pred", pred_path, "Detector results CSV")->required();
  eval_cmd->add_option("--truth", truth_path, "Labeled series CSV")->required();
  eval_cmd->add_option("--k", k_flag, "Allowed detection delay in points");
  eval_cmd->add_option("--granularity", common.granularity, "minute|hour|day")
      ->check(CLI::IsMember({"minute", "hour", "day"}));
  eval_cmd->add_option("--report", report_path, "Report JSON path (stdout when omitted)");

  auto* bench_cmd = app.add_subcommand("bench", "Measure SR detector throughput");
  bench_cmd->add_option("--window", bench_window, "Sliding window size (omega)");
  bench_cmd->add_option("--points", bench_points, "Number of detected points");
  bench_cmd->add_option("--seed", common.seed, "Root random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (detect->parsed()) return cmd_detect(common, window_override, tau_override);
    if (detect_cnn_cmd->parsed())
      return cmd_detect_cnn(common, model_path, decision_threshold, window_override);
    if (inject_cmd->parsed()) return cmd_inject(common, ratio, window_override);
    if (train_cmd->parsed())
      return cmd_train_cnn(data_path, common.config_path, out_path, common.seed);
    if (eval_cmd->parsed())
      return cmd_evaluate(pred_path, truth_path, k_flag, common.granularity, report_path);
    if (bench_cmd->parsed()) return cmd_bench(bench_window, bench_points, common.seed);
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingFile;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
