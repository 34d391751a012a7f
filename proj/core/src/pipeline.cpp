// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/pipeline.hpp"

#include "hpcsentry/error.hpp"
#include "hpcsentry/spectral.hpp"

namespace hpcsentry {

std::vector<Window> collect_windows(std::span<const Trace> traces, const Scaler& scaler, std::size_t window_len,
                                    std::size_t stride) {
  std::vector<Window> out;
  for (const auto& t : traces) {
    auto w = windowize(t, scaler, window_len, stride);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

std::vector<Window> spectral_sequences(std::span<const Window> windows, std::size_t n_fft, bool remove_dc) {
  std::vector<Window> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(spectrum_as_sequence(fft_window(w, n_fft, remove_dc)));
  return out;
}

TrainedPipeline train_pipeline(std::span<const Trace> baseline, std::span<const Trace> disk_encryption,
                               const PipelineTrainingOptions& options) {
  if (baseline.empty()) throw Error(ErrorCode::EmptyCorpus, "no baseline traces to train on");
  if (disk_encryption.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one disk-encryption trace is needed for templates");
  }
  if (options.train_stride == 0) throw Error(ErrorCode::InvalidArgument, "train_stride must be >= 1");
  options.base.validate();

  const std::size_t len = options.base.window_len;
  const Scaler scaler = fit_scaler(baseline);

  TrainedPipeline out;
  out.config = options.base;

  // Stage 1: time-domain windows.
  const auto train1 = collect_windows(baseline, scaler, len, options.train_stride);
  if (train1.empty()) throw Error(ErrorCode::EmptyTrainingSet, "baseline traces are shorter than one window");
  SequenceAutoencoder m1 = train(train1, options.stage1, options.hidden_dim);
  m1.input_scaler = scaler;

  const auto all1 = collect_windows(baseline, scaler, len, 1);
  out.stage1_baseline_errors.reserve(all1.size());
  for (const auto& w : all1) out.stage1_baseline_errors.push_back(m1.reconstruction_error(w));
  out.config.calibration_1 = calibrate_threshold(out.stage1_baseline_errors);

  // Stage 2: spectra, z-scored per channel over bins.
  const bool dc = options.base.spectral_remove_dc;
  const auto spec_train = spectral_sequences(train1, options.base.n_fft, dc);
  const Scaler spec_scaler = fit_scaler(std::span<const Window>(spec_train));
  std::vector<Window> train2;
  train2.reserve(spec_train.size());
  for (const auto& s : spec_train) train2.push_back(apply_scaler(s, spec_scaler));
  SequenceAutoencoder m2 = train(train2, options.stage2, options.hidden_dim);
  m2.input_scaler = spec_scaler;

  out.stage2_baseline_errors.reserve(all1.size());
  for (const auto& w : all1) {
    const Window s = apply_scaler(spectrum_as_sequence(fft_window(w, options.base.n_fft, dc)), spec_scaler);
    out.stage2_baseline_errors.push_back(m2.reconstruction_error(s));
  }
  out.config.calibration_2 = calibrate_threshold(out.stage2_baseline_errors);

  for (std::size_t i = 0; i < disk_encryption.size(); ++i) {
    const Trace& t = disk_encryption[i];
    out.templates.push_back(
        build_template(m1, scaler, t, t.source.empty() ? "disk_encryption_" + std::to_string(i) : t.source));
  }

  out.models = DetectorModels{std::move(m1), std::move(m2)};
  return out;
}

}  // namespace hpcsentry
