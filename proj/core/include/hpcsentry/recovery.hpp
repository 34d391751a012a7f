// SPDX-License-Identifier: Apache-2.0
//
// Backup-based recovery simulation: locked copies of the n most recently
// opened files, dropped after a quiet quantum, restored after a verdict.
// Encryption is modelled as replacing a file's content digest.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpcsentry {

enum class FileState : std::uint8_t { Plain, Encrypted, Recovered };

std::string_view to_string(FileState state) noexcept;

struct SimFile {
  std::uint64_t id = 0;
  std::uint64_t size_bytes = 0;
  std::uint64_t content_digest = 0;
  FileState state = FileState::Plain;

  friend bool operator==(const SimFile&, const SimFile&) = default;
};

/// Plain file with a digest derived from (id, size).
SimFile make_file(std::uint64_t id, std::uint64_t size_bytes) noexcept;

/// Plain -> Encrypted with a new digest; no-op for other states.
void encrypt(SimFile& file) noexcept;

/// ceil(5313.0203 ms / 10 ms): backups outlive the reference detection time.
inline constexpr std::int64_t kDefaultQuantumTicks = 532;

struct BackupEntry {
  std::uint64_t digest = 0;
  bool locked = true;
  std::int64_t created_tick = 0;
  std::uint64_t sequence = 0;  // orders entries opened on the same tick

  friend bool operator==(const BackupEntry&, const BackupEntry&) = default;
};

struct BackupLedger {
  std::size_t capacity_n = 0;
  std::int64_t quantum_ticks = kDefaultQuantumTicks;
  std::map<std::uint64_t, BackupEntry> entries;
  std::uint64_t next_sequence = 0;

  friend bool operator==(const BackupLedger&, const BackupLedger&) = default;
};

/// Inserts or refreshes a locked backup of a Plain file, evicting the oldest
/// entry when over capacity. Files that are not Plain are not backed up.
BackupLedger record_open(BackupLedger ledger, const SimFile& file, std::int64_t tick);

/// Without an active alarm, drops entries with tick - created_tick >= quantum.
BackupLedger purge_expired(BackupLedger ledger, std::int64_t tick, bool alarm_active);

/// Number of files a ransomware run encrypts before it is stopped.
/// Throws Error{BadRate} for rate <= 0.
std::size_t files_encrypted_before_stop(double rate_files_per_s, double detection_latency_ms);

/// Encrypts the first files_encrypted_before_stop(...) files in list order.
std::set<std::uint64_t> simulate_attack(std::span<SimFile> files, double encryption_rate_files_per_s,
                                        double detection_latency_ms);

struct RecoveryReport {
  std::set<std::uint64_t> recovered;
  std::set<std::uint64_t> lost;

  friend bool operator==(const RecoveryReport&, const RecoveryReport&) = default;
};

/// Restores every Encrypted file that has a ledger entry; the rest are lost.
RecoveryReport recover(const BackupLedger& ledger, std::span<SimFile> files);

// --- scenario files ------------------------------------------------------------
// CSV "tick,action,file_id" with an optional header row. Actions: open,
// encrypt, alarm_on, alarm_off, verdict. Expired backups are purged before
// every row; `verdict` runs recovery.

enum class ScenarioAction : std::uint8_t { Open, Encrypt, AlarmOn, AlarmOff, Verdict };

struct ScenarioStep {
  std::int64_t tick = 0;
  ScenarioAction action = ScenarioAction::Open;
  std::uint64_t file_id = 0;
};

/// Throws Error{BadFormat}.
std::vector<ScenarioStep> parse_scenario(std::string_view csv);

struct ScenarioResult {
  std::vector<SimFile> files;  // in first-mention order
  BackupLedger ledger;
  RecoveryReport report;
  std::set<std::uint64_t> encrypted;
  bool verdict_seen = false;
};

ScenarioResult run_scenario(std::span<const ScenarioStep> steps, std::size_t capacity_n,
                            std::int64_t quantum_ticks = kDefaultQuantumTicks, std::uint64_t file_size_bytes = 21);

/// key=value lines; sets print as comma-separated ids.
std::string format_report(const RecoveryReport& report, std::size_t files_total, std::size_t encrypted,
                          std::size_t ledger_size);

}  // namespace hpcsentry
