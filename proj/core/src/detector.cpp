// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/detector.hpp"

#include <algorithm>
#include <chrono>
#include <json.hpp>

#include "hpcsentry/error.hpp"

namespace hpcsentry {

namespace {

constexpr std::array<std::string_view, 7> kModeNames = {
    "Monitoring",           "Stage1Suspect",        "HighComputeCleared",   "RepeatedEncryption",
    "AwaitingAdjudication", "TerminatedRansomware", "ResumedDiskEncryption"};

constexpr std::array<std::string_view, 8> kEventNames = {
    "Stage1Alarm",           "Stage2Cleared", "Stage2Alarm", "DiskEncryptionSuspect",
    "SuspendedAwaitingUser", "UserApproved",  "UserDenied",  "RansomwareVerdict"};

}  // namespace

std::string_view to_string(Mode mode) noexcept { return kModeNames[static_cast<std::size_t>(mode)]; }
std::string_view to_string(EventKind kind) noexcept { return kEventNames[static_cast<std::size_t>(kind)]; }

Mode mode_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == name) return static_cast<Mode>(i);
  }
  throw Error(ErrorCode::BadFormat, "unknown mode '" + std::string(name) + "'");
}

EventKind event_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) return static_cast<EventKind>(i);
  }
  throw Error(ErrorCode::BadFormat, "unknown event kind '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (persistence_k == 0) throw Error(ErrorCode::InvalidArgument, "persistence_k must be >= 1");
  if (window_len == 0 || stride == 0) throw Error(ErrorCode::InvalidArgument, "window_len and stride must be >= 1");
  if (sampling_interval_ms <= 0) throw Error(ErrorCode::InvalidArgument, "sampling_interval_ms must be positive");
  if (!is_power_of_two(n_fft)) throw Error(ErrorCode::NotPowerOfTwo, "n_fft " + std::to_string(n_fft));
  if (n_fft < window_len) throw Error(ErrorCode::WindowTooLong, "n_fft shorter than window_len");
  correlation.validate();
}

const CorrelationTrack& DetectorState::correlation_track() const {
  static const CorrelationTrack kEmpty;
  const CorrelationTrack* best = nullptr;
  for (const auto& t : correlation_tracks) {
    if (t.empty()) continue;
    if (best == nullptr || t.rho.back() > best->rho.back()) best = &t;
  }
  if (best != nullptr) return *best;
  return correlation_tracks.empty() ? kEmpty : correlation_tracks.front();
}

DetectorState initial_state(Privilege privilege, std::size_t template_count) {
  DetectorState s;
  s.privilege = privilege;
  s.correlation_tracks.resize(template_count);
  s.correlators.resize(template_count);
  return s;
}

namespace {

struct Decision {
  CorrelationVerdict verdict = CorrelationVerdict::Undecided;
  std::optional<double> rho;
};

// Disk encryption if any template matches; ransomware only if every
// template rules it out.
Decision decide(const DetectorState& s, const CorrelationPolicy& policy) {
  Decision d;
  bool all_ransomware = !s.correlation_tracks.empty();
  for (const auto& track : s.correlation_tracks) {
    const auto v = classify(track, policy);
    if (v == CorrelationVerdict::DiskEncryption) {
      if (!d.rho || track.rho.back() > *d.rho) d.rho = track.rho.back();
      d.verdict = CorrelationVerdict::DiskEncryption;
    }
    if (v != CorrelationVerdict::Ransomware) all_ransomware = false;
  }
  if (d.verdict == CorrelationVerdict::DiskEncryption) return d;
  if (all_ransomware) {
    d.verdict = CorrelationVerdict::Ransomware;
    d.rho = s.correlation_track().rho.back();
  }
  return d;
}

}  // namespace

StepResult process_window(DetectorState state, const Window& window, const DetectorModels& models,
                          std::span<const ErrorTemplate> templates, const PipelineConfig& config) {
  if (is_terminal(state.mode)) {
    throw Error(ErrorCode::TerminalState, "detector is in terminal mode " + std::string(to_string(state.mode)));
  }
  if (window.rows() != config.window_len || window.cols() != kChannels) {
    throw Error(ErrorCode::ShapeMismatch, "window shape does not match the pipeline configuration");
  }
  if (state.correlation_tracks.size() != templates.size()) {
    throw Error(ErrorCode::InvalidArgument, "state was initialised for a different template count");
  }

  StepResult out{std::move(state), {}};
  DetectorState& s = out.state;
  const std::size_t idx = s.windows_processed;

  const double e1 = models.time_domain.reconstruction_error(window);
  s.stage1_errors.push_back(e1);
  s.stage2_errors.emplace_back();
  ++s.windows_processed;

  // The correlation feed sees every stage-1 error, above or below threshold.
  for (std::size_t j = 0; j < templates.size(); ++j) {
    if (idx >= templates[j].errors.size()) continue;
    const double r = s.correlators[j].push(templates[j].errors[idx], e1);
    if (idx >= 1) s.correlation_tracks[j].rho.push_back(r);
  }

  // A suspended process only feeds the correlation track until the operator answers.
  if (s.mode == Mode::AwaitingAdjudication) return out;

  if (!(e1 > config.calibration_1.threshold)) {
    s.stage1_anomaly_run_length = 0;
    s.stage2_anomaly_run_length = 0;
    s.mode = Mode::Monitoring;
    return out;
  }

  ++s.stage1_anomaly_run_length;
  if (!s.first_anomaly_window) s.first_anomaly_window = idx;
  out.events.push_back({idx, EventKind::Stage1Alarm, {e1, std::nullopt, config.calibration_1.threshold, std::nullopt}});

  const Spectrum spectrum = fft_window(window, config.n_fft, config.spectral_remove_dc);
  const Window sequence = apply_scaler(spectrum_as_sequence(spectrum), models.spectral.input_scaler);
  const double e2 = models.spectral.reconstruction_error(sequence);
  ++s.stage2_evaluations;
  s.stage2_errors.back() = e2;

  if (!(e2 > config.calibration_2.threshold)) {
    s.stage2_anomaly_run_length = 0;
    s.mode = Mode::HighComputeCleared;
    out.events.push_back({idx, EventKind::Stage2Cleared, {std::nullopt, e2, config.calibration_2.threshold, std::nullopt}});
    return out;
  }

  ++s.stage2_anomaly_run_length;
  if (!s.first_stage2_anomaly_window) s.first_stage2_anomaly_window = idx;
  out.events.push_back({idx, EventKind::Stage2Alarm, {std::nullopt, e2, config.calibration_2.threshold, std::nullopt}});

  if (s.stage2_anomaly_run_length < config.persistence_k) {
    s.mode = Mode::Stage1Suspect;
    return out;
  }
  s.mode = Mode::RepeatedEncryption;

  const Decision d = decide(s, config.correlation);
  if (d.verdict == CorrelationVerdict::Ransomware) {
    s.mode = Mode::TerminatedRansomware;
    s.verdict_window = idx;
    out.events.push_back({idx, EventKind::RansomwareVerdict, {e1, e2, std::nullopt, d.rho}});
  } else if (d.verdict == CorrelationVerdict::DiskEncryption) {
    out.events.push_back({idx, EventKind::DiskEncryptionSuspect, {e1, e2, std::nullopt, d.rho}});
    s.verdict_window = idx;
    if (s.privilege == Privilege::Administrator) {
      s.mode = Mode::AwaitingAdjudication;
      out.events.push_back({idx, EventKind::SuspendedAwaitingUser, {std::nullopt, std::nullopt, std::nullopt, d.rho}});
    } else {
      // Disk encryptors need administrator rights; a user-level one is ransomware.
      s.mode = Mode::TerminatedRansomware;
      out.events.push_back({idx, EventKind::RansomwareVerdict, {e1, e2, std::nullopt, d.rho}});
    }
  }
  return out;
}

StepResult adjudicate(DetectorState state, bool approve) {
  if (state.mode != Mode::AwaitingAdjudication) {
    throw Error(ErrorCode::NotAwaiting, "no adjudication pending in mode " + std::string(to_string(state.mode)));
  }
  StepResult out{std::move(state), {}};
  const std::size_t idx = out.state.windows_processed == 0 ? 0 : out.state.windows_processed - 1;
  if (approve) {
    out.state.mode = Mode::ResumedDiskEncryption;
    out.events.push_back({idx, EventKind::UserApproved, {}});
  } else {
    out.state.mode = Mode::TerminatedRansomware;
    out.events.push_back({idx, EventKind::UserDenied, {}});
    out.events.push_back({idx, EventKind::RansomwareVerdict, {}});
  }
  return out;
}

double detection_latency(double first_window_ms, std::size_t anomaly_window_index_1based, double interval_ms,
                         const StageTimings& t) {
  if (anomaly_window_index_1based < 1) throw Error(ErrorCode::BadIndex, "window index is 1-based");
  const double elapsed = first_window_ms + static_cast<double>(anomaly_window_index_1based - 1) * interval_ms;
  const double processing = t.ae1_test_ms + t.fft_ms + t.ae2_test_ms;
  return elapsed + processing;
}

void fill_latency(LatencyReport& report, const DetectorState& state, const Trace& trace,
                  const PipelineConfig& config) {
  const double first_window_ms = static_cast<double>(config.window_len) * trace.sampling_interval_ms;
  const double interval_ms = static_cast<double>(config.stride) * trace.sampling_interval_ms;
  report.windows_processed = state.windows_processed;
  report.budget_ms = trace.sampling_interval_ms;
  auto one_based = [](std::optional<std::size_t> i) -> std::optional<std::size_t> {
    return i ? std::optional<std::size_t>(*i + 1) : std::nullopt;
  };
  report.first_stage1_window = one_based(state.first_anomaly_window);
  report.first_stage2_window = one_based(state.first_stage2_anomaly_window);
  report.verdict_window = one_based(state.verdict_window);
  if (report.first_stage2_window) {
    report.anomaly_latency_ms =
        detection_latency(first_window_ms, *report.first_stage2_window, interval_ms, config.timings);
  }
  if (report.verdict_window) {
    report.verdict_latency_ms =
        detection_latency(first_window_ms, *report.verdict_window, interval_ms, config.timings) +
        config.timings.corr_ms;
  }
}

OnlineResult run_online(const Trace& trace, const DetectorModels& models, std::span<const ErrorTemplate> templates,
                        const PipelineConfig& config) {
  config.validate();
  if (templates.empty()) throw Error(ErrorCode::InvalidArgument, "at least one disk-encryption template is required");

  OnlineResult result;
  DetectorState state = initial_state(trace.privilege, templates.size());
  const Scaler& scaler = models.time_domain.input_scaler;
  const std::size_t count = window_count(trace.size(), config.window_len, config.stride);

  double total_ms = 0.0;
  for (std::size_t i = 0; i < count && !is_terminal(state.mode); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Window w = make_window(trace, scaler, i * config.stride, config.window_len);
    auto step = process_window(std::move(state), w, models, templates, config);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    total_ms += ms;
    result.latency.max_processing_ms = std::max(result.latency.max_processing_ms, ms);
    state = std::move(step.state);
    result.events.insert(result.events.end(), step.events.begin(), step.events.end());
  }
  if (state.windows_processed > 0) result.latency.mean_processing_ms = total_ms / state.windows_processed;
  fill_latency(result.latency, state, trace, config);
  result.final_state = std::move(state);
  return result;
}

int exit_code(Mode mode) noexcept {
  switch (mode) {
    case Mode::TerminatedRansomware: return 2;
    case Mode::AwaitingAdjudication: return 3;
    case Mode::Stage1Suspect:
    case Mode::RepeatedEncryption: return 4;
    case Mode::Monitoring:
    case Mode::HighComputeCleared:
    case Mode::ResumedDiskEncryption: return 0;
  }
  return 0;
}

std::string to_json_line(const DetectionEvent& e) {
  nlohmann::json payload = nlohmann::json::object();
  if (e.payload.stage1_error) payload["stage1_error"] = *e.payload.stage1_error;
  if (e.payload.stage2_error) payload["stage2_error"] = *e.payload.stage2_error;
  if (e.payload.threshold) payload["threshold"] = *e.payload.threshold;
  if (e.payload.rho) payload["rho"] = *e.payload.rho;
  nlohmann::json j = {{"window_index", e.window_index}, {"kind", to_string(e.kind)}, {"payload", std::move(payload)}};
  return j.dump();
}

DetectionEvent parse_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    DetectionEvent e;
    e.window_index = j.at("window_index").get<std::size_t>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    const auto& p = j.at("payload");
    auto opt = [&](const char* key) -> std::optional<double> {
      if (p.contains(key)) return p.at(key).get<double>();
      return std::nullopt;
    };
    e.payload = {opt("stage1_error"), opt("stage2_error"), opt("threshold"), opt("rho")};
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::BadFormat, std::string("event line: ") + ex.what());
  }
}

std::string format_event_log(std::span<const DetectionEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += to_json_line(e);
    out += '\n';
  }
  return out;
}

}  // namespace hpcsentry
