// SPDX-License-Identifier: Apache-2.0
//
// Detection service behind the HTTP API. One replay at a time is folded
// through the detector on a worker thread; every state change (window fold,
// adjudication, replay start) happens under one mutex, so readers always see
// a state reached by a prefix of those changes.
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hpcsentry/app/commands.hpp"
#include "hpcsentry/app/config.hpp"

namespace hpcsentry::app {

struct ServiceOptions {
  /// Traces addressable by trace_id (file stem) in POST /api/replay.
  std::optional<std::filesystem::path> trace_dir;
  /// Serve GET /api/recovery after a ransomware verdict.
  bool simulate_attack = false;
  AttackSimulationConfig attack;
  /// Replay length for profile-based replays.
  std::size_t default_ticks = 5000;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class DetectionService {
 public:
  DetectionService(LoadedRun run, ServiceOptions options);
  ~DetectionService();
  DetectionService(const DetectionService&) = delete;
  DetectionService& operator=(const DetectionService&) = delete;

  HttpResponse get_state() const;
  /// JSON lines of every event from index `from` on (a snapshot).
  HttpResponse get_events(std::size_t from) const;
  HttpResponse get_errors(std::size_t from) const;
  HttpResponse get_correlation() const;
  HttpResponse get_recovery() const;
  /// {"profile": "...", "seed": N, "ticks": N, "speed_multiplier": x} or
  /// {"trace_id": "...", "speed_multiplier": x}. 409 while a replay runs.
  HttpResponse post_replay(std::string_view body);
  /// {"approve": true|false}. 409 unless AwaitingAdjudication.
  HttpResponse post_adjudicate(std::string_view body);

  /// Blocks until there are events past `from`, the replay is idle, or the
  /// timeout passes. Returns the new JSON lines and advances `from`; returns
  /// nullopt once the stream is complete (idle and nothing left to send).
  std::optional<std::string> next_events(std::size_t& from, std::chrono::milliseconds timeout);

  void wait_idle();
  void stop();
  [[nodiscard]] bool replay_running() const;
  [[nodiscard]] std::vector<DetectionEvent> events() const;
  [[nodiscard]] DetectorState state() const;

 private:
  void replay_loop(Trace trace, double speed_multiplier, std::uint64_t generation);
  void append_events(const std::vector<DetectionEvent>& events);

  LoadedRun run_;
  ServiceOptions options_;

  std::mutex replay_mu_;  // serialises replay starts and worker joins
  mutable std::mutex mu_;
  std::condition_variable cv_;
  DetectorState state_;
  Trace trace_;
  std::vector<DetectionEvent> events_;
  std::vector<std::string> event_lines_;
  std::optional<AttackOutcome> recovery_;
  bool running_ = false;
  bool stopping_ = false;
  std::uint64_t generation_ = 0;
  std::thread worker_;
};

/// HTTP front end. Port 0 picks a free port.
class HttpServer {
 public:
  HttpServer(DetectionService& service, std::string host, int port);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hpcsentry::app
