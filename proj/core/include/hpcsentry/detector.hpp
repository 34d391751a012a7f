// SPDX-License-Identifier: Apache-2.0
//
// Online detection fold. Every window is scored by the time-domain model;
// only windows above its threshold are transformed and scored by the
// spectral model. A verdict needs persistence_k consecutive spectral
// anomalies, after which the stage-1 error series is correlated against the
// disk-encryption templates.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hpcsentry/corrmod.hpp"
#include "hpcsentry/seqae.hpp"
#include "hpcsentry/spectral.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {

/// Per-stage processing costs used in latency reports (milliseconds).
/// Defaults are the costs measured on the original testbed.
struct StageTimings {
  double ae1_test_ms = 1.321;
  double fft_ms = 0.0003;
  double ae2_test_ms = 1.699;
  double corr_ms = 0.0001;

  friend bool operator==(const StageTimings&, const StageTimings&) = default;
};

struct PipelineConfig {
  ThresholdCalibration calibration_1;
  ThresholdCalibration calibration_2;
  /// One more than window_len: with stride 1 a single tick sits in exactly
  /// window_len windows, so a shorter run can come from one isolated event.
  std::size_t persistence_k = kDefaultWindowLen + 1;
  CorrelationPolicy correlation;
  std::size_t n_fft = kDefaultFftSize;
  bool spectral_remove_dc = true;
  std::size_t window_len = kDefaultWindowLen;
  std::size_t stride = 1;
  int sampling_interval_ms = kDefaultIntervalMs;
  StageTimings timings;

  /// Throws Error{InvalidArgument} / Error{BadPolicy}.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Stage-1 model scores scaled time windows; stage-2 model scores spectra
/// after its own input_scaler is applied.
struct DetectorModels {
  SequenceAutoencoder time_domain;
  SequenceAutoencoder spectral;
};

enum class Mode : std::uint8_t {
  Monitoring,
  Stage1Suspect,
  HighComputeCleared,
  RepeatedEncryption,
  AwaitingAdjudication,
  TerminatedRansomware,
  ResumedDiskEncryption,
};

enum class EventKind : std::uint8_t {
  Stage1Alarm,
  Stage2Cleared,
  Stage2Alarm,
  DiskEncryptionSuspect,
  SuspendedAwaitingUser,
  UserApproved,
  UserDenied,
  RansomwareVerdict,
};

std::string_view to_string(Mode mode) noexcept;
std::string_view to_string(EventKind kind) noexcept;
Mode mode_from_string(std::string_view name);
EventKind event_kind_from_string(std::string_view name);
[[nodiscard]] constexpr bool is_terminal(Mode m) noexcept {
  return m == Mode::TerminatedRansomware || m == Mode::ResumedDiskEncryption;
}

struct EventPayload {
  std::optional<double> stage1_error;
  std::optional<double> stage2_error;
  std::optional<double> threshold;
  std::optional<double> rho;

  friend bool operator==(const EventPayload&, const EventPayload&) = default;
};

struct DetectionEvent {
  std::size_t window_index = 0;
  EventKind kind = EventKind::Stage1Alarm;
  EventPayload payload;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct DetectorState {
  Mode mode = Mode::Monitoring;
  std::size_t stage1_anomaly_run_length = 0;
  std::size_t stage2_anomaly_run_length = 0;
  std::optional<std::size_t> first_anomaly_window;

  Privilege privilege = Privilege::User;
  std::size_t windows_processed = 0;
  std::size_t stage2_evaluations = 0;
  std::optional<std::size_t> first_stage2_anomaly_window;
  std::optional<std::size_t> verdict_window;

  /// One track (and accumulator) per template, fed every stage-1 error.
  std::vector<CorrelationTrack> correlation_tracks;
  std::vector<CumulativePearson> correlators;
  /// Stage-1 errors of every processed window, in order.
  std::vector<double> stage1_errors;
  /// Stage-2 errors, present only for windows that reached stage 2.
  std::vector<std::optional<double>> stage2_errors;

  /// The track of the template that currently correlates best.
  [[nodiscard]] const CorrelationTrack& correlation_track() const;
};

DetectorState initial_state(Privilege privilege, std::size_t template_count);

struct StepResult {
  DetectorState state;
  std::vector<DetectionEvent> events;
};

/// One fold step. Throws Error{TerminalState} on a terminal state and
/// Error{ShapeMismatch} when the window does not match the configuration.
StepResult process_window(DetectorState state, const Window& window, const DetectorModels& models,
                          std::span<const ErrorTemplate> templates, const PipelineConfig& config);

/// Applies the operator's decision. Throws Error{NotAwaiting} unless the
/// state is AwaitingAdjudication.
StepResult adjudicate(DetectorState state, bool approve);

/// first_window_ms + (index - 1) * interval_ms + stage-1, FFT and stage-2
/// costs. Throws Error{BadIndex} for index < 1.
double detection_latency(double first_window_ms, std::size_t anomaly_window_index_1based, double interval_ms,
                         const StageTimings& timings);

struct LatencyReport {
  std::size_t windows_processed = 0;
  std::optional<std::size_t> first_stage1_window;  // 1-based
  std::optional<std::size_t> first_stage2_window;  // 1-based
  std::optional<std::size_t> verdict_window;       // 1-based
  std::optional<double> anomaly_latency_ms;        // at first stage-2 anomaly
  std::optional<double> verdict_latency_ms;        // at verdict, including correlation cost
  double mean_processing_ms = 0.0;                 // measured wall time per window
  double max_processing_ms = 0.0;
  double budget_ms = 0.0;                          // sampling interval
};

struct OnlineResult {
  std::vector<DetectionEvent> events;
  DetectorState final_state;
  LatencyReport latency;
};

/// Folds process_window over the trace's windows, stopping at a terminal
/// mode. Throws Error{InvalidArgument} when no template is supplied.
OnlineResult run_online(const Trace& trace, const DetectorModels& models, std::span<const ErrorTemplate> templates,
                        const PipelineConfig& config);

/// Fills the latency fields of `report` from a final state.
void fill_latency(LatencyReport& report, const DetectorState& state, const Trace& trace, const PipelineConfig& config);

/// Exit status for a final mode: 0 clean, 2 ransomware, 3 awaiting
/// adjudication, 4 unresolved suspicion.
int exit_code(Mode mode) noexcept;

// --- event log ---------------------------------------------------------------

/// {"kind":"...","payload":{...},"window_index":N}, one object per line.
std::string to_json_line(const DetectionEvent& event);
/// Throws Error{BadFormat}.
DetectionEvent parse_json_line(std::string_view line);
std::string format_event_log(std::span<const DetectionEvent> events);

}  // namespace hpcsentry
