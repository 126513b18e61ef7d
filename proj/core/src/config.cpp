#include "srdetect/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace srdetect {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.contains(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

SrConfig parse_sr(const json& j) {
  check_keys(j, "sr", {"window", "avg_filter", "score_window", "threshold", "estimated_points",
                       "gradient_points", "log_epsilon"});
  SrConfig c;
  get_if(j, "window", c.window);
  get_if(j, "avg_filter", c.avg_filter);
  get_if(j, "score_window", c.score_window);
  get_if(j, "threshold", c.threshold);
  get_if(j, "estimated_points", c.estimated_points);
  get_if(j, "gradient_points", c.gradient_points);
  get_if(j, "log_epsilon", c.log_epsilon);
  return c;
}

TrainConfig parse_train(const json& j) {
  check_keys(j, "train", {"learning_rate", "epochs", "batch_size", "seed", "positive_weight"});
  TrainConfig c;
  get_if(j, "learning_rate", c.learning_rate);
  get_if(j, "epochs", c.epochs);
  get_if(j, "batch_size", c.batch_size);
  get_if(j, "seed", c.seed);
  get_if(j, "positive_weight", c.positive_weight);
  return c;
}

EvalConfig parse_eval(const json& j) {
  check_keys(j, "eval", {"delay_k"});
  EvalConfig c;
  get_if(j, "delay_k", c.delay_k);
  return c;
}

InjectionParams parse_injection(const json& j) {
  check_keys(j, "injection", {"ratio", "seed", "local_window", "r_abs_min", "r_abs_max"});
  InjectionParams c;
  get_if(j, "ratio", c.ratio);
  get_if(j, "seed", c.seed);
  get_if(j, "local_window", c.local_window);
  get_if(j, "r_abs_min", c.r_abs_min);
  get_if(j, "r_abs_max", c.r_abs_max);
  return c;
}

}  // namespace

AppConfig AppConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "config", {"sr", "train", "eval", "injection"});
  AppConfig cfg;
  try {
    if (j.contains("sr")) cfg.sr = parse_sr(j.at("sr"));
    if (j.contains("train")) cfg.train = parse_train(j.at("train"));
    if (j.contains("eval")) cfg.eval = parse_eval(j.at("eval"));
    if (j.contains("injection")) cfg.injection = parse_injection(j.at("injection"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  try {
    cfg.sr.validate();
    cfg.train.validate();
    cfg.injection.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

AppConfig AppConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string AppConfig::to_json_text() const {
  json j;
  j["sr"] = {{"window", sr.window},
             {"avg_filter", sr.avg_filter},
             {"score_window", sr.score_window},
             {"threshold", sr.threshold},
             {"estimated_points", sr.estimated_points},
             {"gradient_points", sr.gradient_points},
             {"log_epsilon", sr.log_epsilon}};
  j["train"] = {{"learning_rate", train.learning_rate},
                {"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"seed", train.seed},
                {"positive_weight", train.positive_weight}};
  j["eval"] = {{"delay_k", eval.delay_k}};
  j["injection"] = {{"ratio", injection.ratio},
                    {"seed", injection.seed},
                    {"local_window", injection.local_window},
                    {"r_abs_min", injection.r_abs_min}};
  // An absent r_abs_max means unbounded; infinity is not representable in JSON.
  if (std::isfinite(injection.r_abs_max)) j["injection"]["r_abs_max"] = injection.r_abs_max;
  return j.dump(2);
}

}  // namespace srdetect
