// SPDX-License-Identifier: Apache-2.0
//
// Disk-encryption discrimination: cumulative Pearson correlation between the
// stage-1 error series of a suspect and a stored template of a known benign
// disk-encryption run.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hpcsentry/seqae.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {

struct ErrorTemplate {
  std::vector<double> errors;
  std::string label;

  friend bool operator==(const ErrorTemplate&, const ErrorTemplate&) = default;
};

/// rho[i] is the correlation over the first i + 2 paired values.
struct CorrelationTrack {
  std::vector<double> rho;

  [[nodiscard]] std::size_t size() const noexcept { return rho.size(); }
  [[nodiscard]] bool empty() const noexcept { return rho.empty(); }
  /// Correlation for prefix length t (t >= 2).
  [[nodiscard]] double at_prefix(std::size_t t) const { return rho.at(t - 2); }

  friend bool operator==(const CorrelationTrack&, const CorrelationTrack&) = default;
};

/// Online Pearson correlation over a growing prefix (co-moment updates).
/// Returns 0 while either series has zero variance.
class CumulativePearson {
 public:
  /// Adds one pair; returns the correlation of everything pushed so far.
  double push(double x, double y) noexcept;
  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double value() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_x_ = 0.0, mean_y_ = 0.0;
  double m2_x_ = 0.0, m2_y_ = 0.0, c_xy_ = 0.0;
};

/// Stage-1 errors of every stride-1 window of `trace`, in order.
/// Throws Error{TraceTooShort} when fewer than two windows fit.
ErrorTemplate build_template(const SequenceAutoencoder& model, const Scaler& scaler, const Trace& trace,
                             std::string label = {});

/// rho for prefix lengths 2..min(|template|, |observed|).
/// Throws Error{TooShort} when either series has fewer than two values.
CorrelationTrack cumulative_pearson(const ErrorTemplate& tmpl, std::span<const double> observed);

struct CorrelationPolicy {
  double rho_high = 0.8;
  double rho_low = 0.3;
  std::size_t m_consecutive = 100;

  /// Throws Error{BadPolicy}.
  void validate() const;

  friend bool operator==(const CorrelationPolicy&, const CorrelationPolicy&) = default;
};

enum class CorrelationVerdict { DiskEncryption, Ransomware, Undecided };

std::string_view to_string(CorrelationVerdict verdict) noexcept;

/// Looks only at the last m_consecutive values. Disk encryption wins ties.
CorrelationVerdict classify(const CorrelationTrack& track, const CorrelationPolicy& policy);

/// True iff the traced process runs with administrator privilege.
[[nodiscard]] bool privilege_check(const Trace& trace) noexcept;

// --- template files ------------------------------------------------------------
//   # label=<label>
//   error
//   <one value per line>

void write_template(std::ostream& out, const ErrorTemplate& tmpl);
ErrorTemplate read_template(std::istream& in);
void save_template(const std::string& path, const ErrorTemplate& tmpl);
ErrorTemplate load_template(const std::string& path);

}  // namespace hpcsentry
