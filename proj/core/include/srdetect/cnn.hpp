#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srdetect/detector.hpp"
#include "srdetect/synth.hpp"
#include "srdetect/timeseries.hpp"

namespace srdetect {

/// The saliency-window discriminator. Both convolutions use filter size equal
/// to the window, so with valid convolution the spatial extent collapses to 1
/// and each layer is a dense map: window -> window channels -> 2*window
/// channels, then fully connected 2w -> w -> 1 with a sigmoid output.
/// ReLU between layers.
struct CnnModel {
  std::size_t window = 0;
  uint32_t version = 1;

  std::vector<double> conv1_w, conv1_b;  // [w x w], [w]
  std::vector<double> conv2_w, conv2_b;  // [2w x w], [2w]
  std::vector<double> fc1_w, fc1_b;      // [w x 2w], [w]
  std::vector<double> fc2_w, fc2_b;      // [1 x w], [1]

  /// Fan-in scaled uniform init, seed-controlled.
  static CnnModel init(std::size_t window, uint64_t seed);
  void validate() const;  // shapes, finiteness, 2x channel doubling
  std::size_t parameter_count() const;
};

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  uint64_t seed = 0;
  double positive_weight = 1.0;

  void validate() const;
};

struct CnnGradients {
  std::vector<double> conv1_w, conv1_b;
  std::vector<double> conv2_w, conv2_b;
  std::vector<double> fc1_w, fc1_b;
  std::vector<double> fc2_w, fc2_b;

  static CnnGradients zeros_like(const CnnModel& m);
  void accumulate(const CnnGradients& other);
  void scale(double s);
};

/// Scales a raw saliency window to its relative deviation from the window
/// mean, making the discriminator input scale-free.
std::vector<double> preprocess_window(std::span<const double> saliency);

/// Sigmoid probability for one saliency window (preprocessed internally).
double forward(const CnnModel& model, std::span<const double> saliency_window);

/// Weighted cross-entropy of one preprocessed sample.
double sample_loss(const CnnModel& model, std::span<const double> input, double label,
                   double positive_weight);
/// Same loss, also filling analytic gradients (backprop). Input must already
/// be preprocessed; used by training and the finite-difference checks.
double sample_loss_grad(const CnnModel& model, std::span<const double> input, double label,
                        double positive_weight, CnnGradients& grads);

struct TrainStats {
  std::vector<double> epoch_loss;  // mean sample loss per epoch
};

/// Mini-batch SGD on the cross-entropy loss. Throws on a single-class dataset
/// or when the loss turns non-finite.
CnnModel train(const TrainingSet& dataset, const TrainConfig& tcfg, TrainStats* stats = nullptr);

/// Streaming detection with the threshold rule replaced by the discriminator;
/// score carries the probability.
std::vector<DetectionResult> detect_cnn(const TimeSeries& series, const CnnModel& model,
                                        const SrConfig& cfg, double decision_threshold = 0.5);

/// Little-endian binary, f32 weights: "SRCM", u32 version, u32 window, then
/// the eight weight arrays in declaration order, each with a u64 length prefix.
void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

}  // namespace srdetect
