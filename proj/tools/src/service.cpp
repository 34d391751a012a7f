// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/app/service.hpp"

#include <charconv>

#include "httplib.h"
#include "json.hpp"

#include "hpcsentry/error.hpp"

namespace hpcsentry::app {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, std::string_view message) {
  return json_response(status, json{{"error", message}});
}

json optional_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

bool valid_trace_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return id.find("..") == std::string_view::npos;
}

}  // namespace

DetectionService::DetectionService(LoadedRun run, ServiceOptions options)
    : run_(std::move(run)), options_(std::move(options)), state_(initial_state(Privilege::User, run_.templates.size())) {}

DetectionService::~DetectionService() { stop(); }

void DetectionService::stop() {
  std::lock_guard replay_lock(replay_mu_);
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void DetectionService::wait_idle() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !running_; });
}

bool DetectionService::replay_running() const {
  std::lock_guard lock(mu_);
  return running_;
}

std::vector<DetectionEvent> DetectionService::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

DetectorState DetectionService::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

void DetectionService::append_events(const std::vector<DetectionEvent>& events) {
  for (const auto& e : events) {
    events_.push_back(e);
    event_lines_.push_back(to_json_line(e) + '\n');
    if (e.kind == EventKind::RansomwareVerdict && options_.simulate_attack && !recovery_) {
      LatencyReport report;
      fill_latency(report, state_, trace_, run_.config);
      recovery_ = simulate_recovery(options_.attack, report.verdict_latency_ms.value_or(0.0));
    }
  }
}

HttpResponse DetectionService::get_state() const {
  std::lock_guard lock(mu_);
  const auto& c = run_.config;
  json config = {
      {"threshold1", c.calibration_1.threshold}, {"mu1", c.calibration_1.mu},
      {"sigma1", c.calibration_1.sigma},         {"threshold2", c.calibration_2.threshold},
      {"mu2", c.calibration_2.mu},               {"sigma2", c.calibration_2.sigma},
      {"persistence_k", c.persistence_k},        {"rho_high", c.correlation.rho_high},
      {"rho_low", c.correlation.rho_low},        {"m_consecutive", c.correlation.m_consecutive},
      {"window_len", c.window_len},              {"n_fft", c.n_fft},
      {"sampling_interval_ms", c.sampling_interval_ms},
  };
  json body = {
      {"mode", to_string(state_.mode)},
      {"exit_code", exit_code(state_.mode)},
      {"privilege", to_string(state_.privilege)},
      {"windows_processed", state_.windows_processed},
      {"stage1_anomaly_run_length", state_.stage1_anomaly_run_length},
      {"stage2_anomaly_run_length", state_.stage2_anomaly_run_length},
      {"stage2_evaluations", state_.stage2_evaluations},
      {"first_anomaly_window", optional_index(state_.first_anomaly_window)},
      {"verdict_window", optional_index(state_.verdict_window)},
      {"event_count", events_.size()},
      {"replay_running", running_},
      {"config", std::move(config)},
  };
  return json_response(200, body);
}

HttpResponse DetectionService::get_events(std::size_t from) const {
  std::lock_guard lock(mu_);
  std::string body;
  for (std::size_t i = from; i < event_lines_.size(); ++i) body += event_lines_[i];
  return {200, std::move(body), "application/x-ndjson"};
}

std::optional<std::string> DetectionService::next_events(std::size_t& from, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return from < event_lines_.size() || !running_ || stopping_; });
  if (from < event_lines_.size()) {
    std::string out;
    for (; from < event_lines_.size(); ++from) out += event_lines_[from];
    return out;
  }
  if (!running_ || stopping_) return std::nullopt;
  return std::string();
}

HttpResponse DetectionService::get_errors(std::size_t from) const {
  std::lock_guard lock(mu_);
  json s1 = json::array(), s2 = json::array();
  for (std::size_t i = from; i < state_.stage1_errors.size(); ++i) {
    s1.push_back(state_.stage1_errors[i]);
    s2.push_back(state_.stage2_errors[i] ? json(*state_.stage2_errors[i]) : json(nullptr));
  }
  return json_response(200, json{{"from", from},
                                 {"threshold1", run_.config.calibration_1.threshold},
                                 {"threshold2", run_.config.calibration_2.threshold},
                                 {"stage1", std::move(s1)},
                                 {"stage2", std::move(s2)}});
}

HttpResponse DetectionService::get_correlation() const {
  std::lock_guard lock(mu_);
  json tracks = json::array();
  std::string best_label;
  const CorrelationTrack& best = state_.correlation_track();
  for (std::size_t i = 0; i < state_.correlation_tracks.size(); ++i) {
    tracks.push_back({{"template", run_.templates[i].label}, {"rho", state_.correlation_tracks[i].rho}});
    if (&state_.correlation_tracks[i] == &best) best_label = run_.templates[i].label;
  }
  return json_response(200, json{{"template", best_label},
                                 {"rho", best.rho},
                                 {"rho_high", run_.config.correlation.rho_high},
                                 {"rho_low", run_.config.correlation.rho_low},
                                 {"m_consecutive", run_.config.correlation.m_consecutive},
                                 {"tracks", std::move(tracks)}});
}

HttpResponse DetectionService::get_recovery() const {
  std::lock_guard lock(mu_);
  if (!options_.simulate_attack) return error_response(404, "attack simulation is disabled");
  if (!recovery_) return json_response(200, json{{"available", false}});
  return json_response(200, json{{"available", true},
                                 {"files_total", recovery_->files_total},
                                 {"encrypted", recovery_->encrypted},
                                 {"ledger_size", recovery_->ledger_size},
                                 {"recovered", recovery_->report.recovered},
                                 {"lost", recovery_->report.lost}});
}

HttpResponse DetectionService::post_replay(std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error_response(400, "body is not valid JSON");
  }
  if (!req.is_object()) return error_response(400, "body must be a JSON object");

  double speed = 1.0;
  Trace trace;
  try {
    if (req.contains("speed_multiplier")) speed = req.at("speed_multiplier").get<double>();
    if (!(speed > 0.0)) return error_response(400, "speed_multiplier must be positive");
    const bool has_profile = req.contains("profile");
    const bool has_id = req.contains("trace_id");
    if (has_profile == has_id) return error_response(400, "give exactly one of profile or trace_id");
    if (has_profile) {
      const auto seed = req.value("seed", std::uint64_t{1});
      const auto ticks = req.value("ticks", options_.default_ticks);
      trace = generate_trace(parse_profile(req.at("profile").get<std::string>()), ticks, seed);
    } else {
      const auto id = req.at("trace_id").get<std::string>();
      if (!valid_trace_id(id)) return error_response(400, "invalid trace_id");
      if (!options_.trace_dir) return error_response(404, "no trace directory configured");
      std::optional<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(*options_.trace_dir)) {
        if (entry.is_regular_file() && entry.path().stem() == id) found = entry.path();
      }
      if (!found) return error_response(404, "unknown trace_id");
      trace = load_trace(found->string());
    }
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  } catch (const Error& e) {
    return error_response(e.code() == ErrorCode::Io ? 500 : 400, e.what());
  }

  std::lock_guard replay_lock(replay_mu_);
  std::uint64_t generation = 0;
  {
    std::lock_guard lock(mu_);
    if (running_) return error_response(409, "a replay is already running");
    if (stopping_) return error_response(503, "service is stopping");
  }
  if (worker_.joinable()) worker_.join();
  {
    std::lock_guard lock(mu_);
    if (running_) return error_response(409, "a replay is already running");
    state_ = initial_state(trace.privilege, run_.templates.size());
    events_.clear();
    event_lines_.clear();
    recovery_.reset();
    running_ = true;
    generation = ++generation_;
    trace_ = trace;
  }
  cv_.notify_all();
  worker_ = std::thread(&DetectionService::replay_loop, this, std::move(trace), speed, generation);
  return json_response(202, json{{"accepted", true}, {"generation", generation}});
}

HttpResponse DetectionService::post_adjudicate(std::string_view body) {
  bool approve = false;
  try {
    const json req = json::parse(body);
    if (!req.is_object() || !req.contains("approve") || !req.at("approve").is_boolean()) {
      return error_response(400, "expected {\"approve\": true|false}");
    }
    approve = req.at("approve").get<bool>();
  } catch (const json::exception&) {
    return error_response(400, "body is not valid JSON");
  }
  std::lock_guard lock(mu_);
  if (state_.mode != Mode::AwaitingAdjudication) {
    return error_response(409, "no adjudication pending in mode " + std::string(to_string(state_.mode)));
  }
  auto step = adjudicate(state_, approve);
  state_ = std::move(step.state);
  append_events(step.events);
  cv_.notify_all();
  return json_response(200, json{{"mode", to_string(state_.mode)}, {"exit_code", exit_code(state_.mode)}});
}

void DetectionService::replay_loop(Trace trace, double speed_multiplier, std::uint64_t generation) {
  const auto& c = run_.config;
  const Scaler& scaler = run_.models.time_domain.input_scaler;
  const std::size_t count = window_count(trace.size(), c.window_len, c.stride);
  const auto pace = std::chrono::duration<double, std::milli>(c.sampling_interval_ms * c.stride / speed_multiplier);

  for (std::size_t i = 0; i < count; ++i) {
    const Window w = make_window(trace, scaler, i * c.stride, c.window_len);
    {
      std::unique_lock lock(mu_);
      if (stopping_ || generation != generation_ || is_terminal(state_.mode)) break;
      try {
        auto step = process_window(std::move(state_), w, run_.models, run_.templates, c);
        state_ = std::move(step.state);
        append_events(step.events);
      } catch (const Error&) {
        break;
      }
      cv_.notify_all();
      const auto wait = std::chrono::duration_cast<std::chrono::nanoseconds>(pace);
      if (wait.count() > 0 && cv_.wait_for(lock, wait, [&] { return stopping_; })) break;
    }
  }
  {
    std::lock_guard lock(mu_);
    running_ = false;
  }
  cv_.notify_all();
}

// --- HTTP ----------------------------------------------------------------------

struct HttpServer::Impl {
  Impl(DetectionService& s, std::string h, int p) : service(s), host(std::move(h)), port(p) {}
  DetectionService& service;
  std::string host;
  int port;
  httplib::Server server;
  std::thread thread;
};

namespace {

void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type.c_str());
}

// Parses ?from=N; absent means 0.
std::optional<std::size_t> from_param(const httplib::Request& req) {
  if (!req.has_param("from")) return 0;
  const std::string v = req.get_param_value("from");
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) return std::nullopt;
  return out;
}

}  // namespace

HttpServer::HttpServer(DetectionService& service, std::string host, int port)
    : impl_(std::make_unique<Impl>(service, std::move(host), port)) {
  auto& svr = impl_->server;
  auto& svc = impl_->service;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svr.Get("/api/state", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_state()); });
  svr.Get("/api/correlation",
          [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_correlation()); });
  svr.Get("/api/recovery", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_recovery()); });
  svr.Get("/api/errors", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto from = from_param(req);
    send(res, from ? svc.get_errors(*from) : error_response(400, "from must be a non-negative integer"));
  });
  svr.Get("/api/events", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto from = from_param(req);
    if (!from) return send(res, error_response(400, "from must be a non-negative integer"));
    res.set_chunked_content_provider(
        "application/x-ndjson", [&svc, cursor = *from](std::size_t, httplib::DataSink& sink) mutable {
          const auto chunk = svc.next_events(cursor, std::chrono::milliseconds(250));
          if (!chunk) {
            sink.done();
            return true;
          }
          return chunk->empty() || sink.write(chunk->data(), chunk->size());
        });
  });
  svr.Post("/api/replay",
           [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.post_replay(req.body)); });
  svr.Post("/api/adjudicate",
           [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.post_adjudicate(req.body)); });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto& i = *impl_;
  if (i.port == 0) {
    i.port = i.server.bind_to_any_port(i.host);
    if (i.port < 0) throw Error(ErrorCode::Io, "cannot bind " + i.host);
  } else if (!i.server.bind_to_port(i.host, i.port)) {
    throw Error(ErrorCode::Io, "cannot bind " + i.host + ":" + std::to_string(i.port));
  }
  i.thread = std::thread([&i] { i.server.listen_after_bind(); });
  return i.port;
}

void HttpServer::run() {
  auto& i = *impl_;
  if (!i.server.listen(i.host, i.port)) throw Error(ErrorCode::Io, "cannot listen on " + i.host);
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace hpcsentry::app
