// SPDX-License-Identifier: Apache-2.0
//
// Gated recurrent sequence autoencoder and 3-sigma threshold calibration.
//
// Encoder: a GRU layer reads the sequence; its final hidden state is the
// feature vector F. Decoder: a second GRU, started at F and fed nothing but
// its own previous state, is unrolled seq_len steps; a shared linear
// projection maps each decoder state back to input_dim values.
//
// The same class scores time-domain windows (stage 1) and spectra
// reinterpreted as sequences (stage 2).
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {

struct TrainingConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double gradient_clip = 5.0;  // global-norm clip; <= 0 disables

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct TrainingReport {
  double initial_error = 0.0;  // mean reconstruction error before the first update
  double final_error = 0.0;    // same measure after the last epoch
  std::vector<double> epoch_loss;
};

class SequenceAutoencoder {
 public:
  static constexpr std::size_t kDefaultHidden = 32;

  SequenceAutoencoder() = default;
  /// Recurrent weights are drawn from U(-1/sqrt(hidden), 1/sqrt(hidden)) using
  /// `init_seed`; biases and the output projection start at zero.
  SequenceAutoencoder(std::size_t input_dim, std::size_t seq_len, std::size_t hidden_dim,
                      std::uint64_t init_seed);

  [[nodiscard]] std::size_t input_dim() const noexcept { return input_dim_; }
  [[nodiscard]] std::size_t seq_len() const noexcept { return seq_len_; }
  [[nodiscard]] std::size_t hidden_dim() const noexcept { return hidden_dim_; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }
  [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
  [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
  [[nodiscard]] bool parameters_finite() const noexcept;

  /// (decode . encode)(window). Throws Error{ShapeMismatch}.
  [[nodiscard]] Window reconstruct(const Window& window) const;
  /// Intermediate feature vector F (final encoder state).
  [[nodiscard]] std::vector<double> encode(const Window& window) const;
  /// Mean of squared entrywise differences. Throws Error{ShapeMismatch}.
  [[nodiscard]] double reconstruction_error(const Window& window) const;

  /// Mean loss over `batch`; writes d(mean loss)/d(parameters) into `grad`
  /// (resized to parameter_count()). Throws Error{ShapeMismatch}.
  double loss_and_gradient(std::span<const Window> batch, std::vector<double>& grad) const;

  /// Scaler that produced this model's inputs; persisted alongside the weights.
  Scaler input_scaler;
  TrainingConfig training_config;

  friend bool operator==(const SequenceAutoencoder&, const SequenceAutoencoder&) = default;

 private:
  void check_shape(const Window& window) const;

  std::size_t input_dim_ = 0;
  std::size_t seq_len_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<double> params_;
};

/// Minibatch SGD on the mean reconstruction error. Deterministic for a fixed
/// config.seed. Throws Error with EmptyTrainingSet / ShapeMismatch /
/// DivergedTraining.
SequenceAutoencoder train(std::span<const Window> windows, const TrainingConfig& config,
                          std::size_t hidden_dim = SequenceAutoencoder::kDefaultHidden,
                          TrainingReport* report = nullptr);

double reconstruction_error(const SequenceAutoencoder& model, const Window& window);

/// Mean squared entrywise difference of two same-shape blocks.
double mean_squared_difference(const Window& a, const Window& b);

struct ThresholdCalibration {
  double mu = 0.0;
  double sigma = 0.0;
  double threshold = 0.0;  // mu + 3 * sigma

  friend bool operator==(const ThresholdCalibration&, const ThresholdCalibration&) = default;
};

inline constexpr double kSigmaMultiplier = 3.0;

/// Arithmetic mean and population standard deviation of `errors`.
/// Throws Error{InsufficientSamples} for fewer than two values.
ThresholdCalibration calibrate_threshold(std::span<const double> errors);

/// Calibration built from explicit mean and deviation (threshold derived).
ThresholdCalibration make_calibration(double mu, double sigma) noexcept;

struct WindowScore {
  std::size_t window_index = 0;
  double error = 0.0;
  bool is_anomalous = false;  // error > threshold, strictly

  friend bool operator==(const WindowScore&, const WindowScore&) = default;
};

std::vector<WindowScore> score_stream(const SequenceAutoencoder& model, const ThresholdCalibration& calibration,
                                      std::span<const Window> windows);

/// Values measured on the original testbed. Documentation only; local
/// thresholds are always recalibrated.
inline constexpr double kReferenceStage1Threshold = 5.38e-6;
inline constexpr double kReferenceStage2Threshold = 0.002829;

// --- persistence -------------------------------------------------------------

void write_model(std::ostream& out, const SequenceAutoencoder& model);
SequenceAutoencoder read_model(std::istream& in);
void save_model(const std::string& path, const SequenceAutoencoder& model);
SequenceAutoencoder load_model(const std::string& path);

}  // namespace hpcsentry
