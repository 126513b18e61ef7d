#pragma once

#include <stdexcept>
#include <string>

#include "srdetect/cnn.hpp"
#include "srdetect/eval.hpp"
#include "srdetect/spectral.hpp"
#include "srdetect/synth.hpp"

namespace srdetect {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whole-application configuration. JSON parsing is strict: unknown keys are
/// rejected and every nested invariant is validated.
struct AppConfig {
  SrConfig sr;
  TrainConfig train;
  EvalConfig eval;
  InjectionParams injection;

  static AppConfig from_json_text(const std::string& text);
  static AppConfig from_file(const std::string& path);
  std::string to_json_text() const;
};

}  // namespace srdetect
