// SPDX-License-Identifier: Apache-2.0
//
// Offline fitting of both detection stages from baseline traces, plus the
// disk-encryption templates used by the correlation stage.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hpcsentry/corrmod.hpp"
#include "hpcsentry/detector.hpp"
#include "hpcsentry/seqae.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {

struct PipelineTrainingOptions {
  TrainingConfig stage1;
  TrainingConfig stage2;
  std::size_t hidden_dim = SequenceAutoencoder::kDefaultHidden;
  /// Offset between training windows; calibration always uses stride 1.
  std::size_t train_stride = 10;
  /// Window length, FFT size, k and the correlation policy come from here.
  PipelineConfig base;
};

struct TrainedPipeline {
  DetectorModels models;
  PipelineConfig config;  // base with both calibrations filled in
  std::vector<ErrorTemplate> templates;
  std::vector<double> stage1_baseline_errors;
  std::vector<double> stage2_baseline_errors;
};

/// Windows of every trace at the given stride, scaled.
std::vector<Window> collect_windows(std::span<const Trace> traces, const Scaler& scaler, std::size_t window_len,
                                    std::size_t stride);

/// Spectral sequences (unscaled) of the given time-domain windows.
std::vector<Window> spectral_sequences(std::span<const Window> windows, std::size_t n_fft, bool remove_dc);

/// Throws Error{EmptyCorpus} without baseline traces and Error{InvalidArgument}
/// without disk-encryption traces.
TrainedPipeline train_pipeline(std::span<const Trace> baseline, std::span<const Trace> disk_encryption,
                               const PipelineTrainingOptions& options);

}  // namespace hpcsentry
