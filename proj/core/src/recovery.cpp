// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/recovery.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "hpcsentry/error.hpp"

namespace hpcsentry {
namespace {

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(FileState state) noexcept {
  switch (state) {
    case FileState::Plain: return "Plain";
    case FileState::Encrypted: return "Encrypted";
    case FileState::Recovered: return "Recovered";
  }
  return "Plain";
}

SimFile make_file(std::uint64_t id, std::uint64_t size_bytes) noexcept {
  return SimFile{id, size_bytes, splitmix(splitmix(id) ^ size_bytes), FileState::Plain};
}

void encrypt(SimFile& file) noexcept {
  if (file.state != FileState::Plain) return;
  file.content_digest = splitmix(file.content_digest ^ 0xC1F3E2D4B5A69788ULL);
  file.state = FileState::Encrypted;
}

BackupLedger record_open(BackupLedger ledger, const SimFile& file, std::int64_t tick) {
  if (file.state != FileState::Plain || ledger.capacity_n == 0) return ledger;
  ledger.entries[file.id] = BackupEntry{file.content_digest, true, tick, ledger.next_sequence++};
  while (ledger.entries.size() > ledger.capacity_n) {
    auto oldest = std::min_element(ledger.entries.begin(), ledger.entries.end(), [](const auto& a, const auto& b) {
      if (a.second.created_tick != b.second.created_tick) return a.second.created_tick < b.second.created_tick;
      return a.second.sequence < b.second.sequence;
    });
    ledger.entries.erase(oldest);
  }
  return ledger;
}

BackupLedger purge_expired(BackupLedger ledger, std::int64_t tick, bool alarm_active) {
  if (alarm_active) return ledger;
  std::erase_if(ledger.entries, [&](const auto& kv) { return tick - kv.second.created_tick >= ledger.quantum_ticks; });
  return ledger;
}

std::size_t files_encrypted_before_stop(double rate_files_per_s, double detection_latency_ms) {
  if (!(rate_files_per_s > 0.0) || !std::isfinite(rate_files_per_s)) {
    throw Error(ErrorCode::BadRate, "encryption rate must be positive");
  }
  if (!(detection_latency_ms > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(rate_files_per_s * detection_latency_ms / 1000.0));
}

std::set<std::uint64_t> simulate_attack(std::span<SimFile> files, double encryption_rate_files_per_s,
                                        double detection_latency_ms) {
  const std::size_t n = std::min(files.size(), files_encrypted_before_stop(encryption_rate_files_per_s,
                                                                          detection_latency_ms));
  std::set<std::uint64_t> hit;
  for (std::size_t i = 0; i < n; ++i) {
    encrypt(files[i]);
    hit.insert(files[i].id);
  }
  return hit;
}

RecoveryReport recover(const BackupLedger& ledger, std::span<SimFile> files) {
  RecoveryReport report;
  for (auto& f : files) {
    if (f.state != FileState::Encrypted) continue;
    if (auto it = ledger.entries.find(f.id); it != ledger.entries.end()) {
      f.content_digest = it->second.digest;
      f.state = FileState::Recovered;
      report.recovered.insert(f.id);
    } else {
      report.lost.insert(f.id);
    }
  }
  return report;
}

std::vector<ScenarioStep> parse_scenario(std::string_view csv) {
  std::vector<ScenarioStep> steps;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line.rfind("tick", 0) == 0) continue;

    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw Error(ErrorCode::BadFormat, "scenario line " + std::to_string(line_no) + ": expected tick,action,file_id");
    }
    const auto tick_s = line.substr(0, c1);
    const auto action_s = line.substr(c1 + 1, c2 - c1 - 1);
    const auto id_s = line.substr(c2 + 1);

    ScenarioStep step;
    auto bad = [&](const char* what) {
      throw Error(ErrorCode::BadFormat, "scenario line " + std::to_string(line_no) + ": bad " + what);
    };
    if (auto [p, ec] = std::from_chars(tick_s.data(), tick_s.data() + tick_s.size(), step.tick);
        ec != std::errc{} || p != tick_s.data() + tick_s.size()) {
      bad("tick");
    }
    if (action_s == "open") step.action = ScenarioAction::Open;
    else if (action_s == "encrypt") step.action = ScenarioAction::Encrypt;
    else if (action_s == "alarm_on") step.action = ScenarioAction::AlarmOn;
    else if (action_s == "alarm_off") step.action = ScenarioAction::AlarmOff;
    else if (action_s == "verdict") step.action = ScenarioAction::Verdict;
    else bad("action");
    if (!id_s.empty()) {
      if (auto [p, ec] = std::from_chars(id_s.data(), id_s.data() + id_s.size(), step.file_id);
          ec != std::errc{} || p != id_s.data() + id_s.size()) {
        bad("file_id");
      }
    } else if (step.action == ScenarioAction::Open || step.action == ScenarioAction::Encrypt) {
      bad("file_id");
    }
    if (!steps.empty() && step.tick < steps.back().tick) bad("tick order");
    steps.push_back(step);
  }
  return steps;
}

ScenarioResult run_scenario(std::span<const ScenarioStep> steps, std::size_t capacity_n, std::int64_t quantum_ticks,
                            std::uint64_t file_size_bytes) {
  ScenarioResult r;
  r.ledger.capacity_n = capacity_n;
  r.ledger.quantum_ticks = quantum_ticks;
  std::unordered_map<std::uint64_t, std::size_t> index;
  auto file = [&](std::uint64_t id) -> SimFile& {
    auto [it, inserted] = index.try_emplace(id, r.files.size());
    if (inserted) r.files.push_back(make_file(id, file_size_bytes));
    return r.files[it->second];
  };

  bool alarm = false;
  for (const auto& step : steps) {
    r.ledger = purge_expired(std::move(r.ledger), step.tick, alarm);
    switch (step.action) {
      case ScenarioAction::Open:
        r.ledger = record_open(std::move(r.ledger), file(step.file_id), step.tick);
        break;
      case ScenarioAction::Encrypt: {
        auto& f = file(step.file_id);
        if (f.state == FileState::Plain) {
          encrypt(f);
          r.encrypted.insert(f.id);
        }
        break;
      }
      case ScenarioAction::AlarmOn: alarm = true; break;
      case ScenarioAction::AlarmOff: alarm = false; break;
      case ScenarioAction::Verdict: {
        r.verdict_seen = true;
        const auto rep = recover(r.ledger, r.files);
        r.report.recovered.insert(rep.recovered.begin(), rep.recovered.end());
        break;
      }
    }
  }
  r.report.lost.clear();
  for (const auto& f : r.files) {
    if (f.state == FileState::Encrypted) r.report.lost.insert(f.id);
  }
  return r;
}

std::string format_report(const RecoveryReport& report, std::size_t files_total, std::size_t encrypted,
                          std::size_t ledger_size) {
  auto join = [](const std::set<std::uint64_t>& ids) {
    std::string s;
    for (auto id : ids) {
      if (!s.empty()) s += ',';
      s += std::to_string(id);
    }
    return s;
  };
  std::ostringstream out;
  out << "files_total=" << files_total << '\n'
      << "encrypted=" << encrypted << '\n'
      << "recovered_count=" << report.recovered.size() << '\n'
      << "lost_count=" << report.lost.size() << '\n'
      << "ledger_size=" << ledger_size << '\n'
      << "recovered=" << join(report.recovered) << '\n'
      << "lost=" << join(report.lost) << '\n';
  return out.str();
}

}  // namespace hpcsentry
