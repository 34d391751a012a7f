// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/corrmod.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "hpcsentry/error.hpp"

namespace hpcsentry {

double CumulativePearson::push(double x, double y) noexcept {
  ++n_;
  const double n = static_cast<double>(n_);
  const double dx = x - mean_x_;
  const double dy = y - mean_y_;
  const double w = (n - 1.0) / n;
  mean_x_ += dx / n;
  mean_y_ += dy / n;
  m2_x_ += dx * dx * w;
  m2_y_ += dy * dy * w;
  c_xy_ += dx * dy * w;
  return value();
}

double CumulativePearson::value() const noexcept {
  if (n_ < 2 || !(m2_x_ > 0.0) || !(m2_y_ > 0.0)) return 0.0;
  const double r = c_xy_ / std::sqrt(m2_x_ * m2_y_);
  return std::clamp(r, -1.0, 1.0);
}

ErrorTemplate build_template(const SequenceAutoencoder& model, const Scaler& scaler, const Trace& trace,
                             std::string label) {
  const std::size_t count = window_count(trace.size(), model.seq_len(), 1);
  if (count < 2) {
    throw Error(ErrorCode::TraceTooShort, "template needs at least " + std::to_string(model.seq_len() + 1) +
                                              " ticks, trace has " + std::to_string(trace.size()));
  }
  ErrorTemplate out;
  out.label = label.empty() ? trace.source : std::move(label);
  out.errors.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.errors.push_back(model.reconstruction_error(make_window(trace, scaler, i, model.seq_len())));
  }
  return out;
}

CorrelationTrack cumulative_pearson(const ErrorTemplate& tmpl, std::span<const double> observed) {
  if (tmpl.errors.size() < 2 || observed.size() < 2) {
    throw Error(ErrorCode::TooShort, "cumulative correlation needs two values in each series");
  }
  const std::size_t len = std::min(tmpl.errors.size(), observed.size());
  CorrelationTrack track;
  track.rho.reserve(len - 1);
  CumulativePearson acc;
  for (std::size_t i = 0; i < len; ++i) {
    const double r = acc.push(tmpl.errors[i], observed[i]);
    if (i >= 1) track.rho.push_back(r);
  }
  return track;
}

void CorrelationPolicy::validate() const {
  if (!(rho_low <= rho_high)) throw Error(ErrorCode::BadPolicy, "rho_low must not exceed rho_high");
  if (m_consecutive == 0) throw Error(ErrorCode::BadPolicy, "m_consecutive must be >= 1");
}

std::string_view to_string(CorrelationVerdict verdict) noexcept {
  switch (verdict) {
    case CorrelationVerdict::DiskEncryption: return "DiskEncryption";
    case CorrelationVerdict::Ransomware: return "Ransomware";
    case CorrelationVerdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

CorrelationVerdict classify(const CorrelationTrack& track, const CorrelationPolicy& policy) {
  policy.validate();
  if (track.size() < policy.m_consecutive) return CorrelationVerdict::Undecided;
  const auto tail = std::span(track.rho).last(policy.m_consecutive);
  if (std::all_of(tail.begin(), tail.end(), [&](double r) { return r >= policy.rho_high; })) {
    return CorrelationVerdict::DiskEncryption;
  }
  if (std::all_of(tail.begin(), tail.end(), [&](double r) { return r <= policy.rho_low; })) {
    return CorrelationVerdict::Ransomware;
  }
  return CorrelationVerdict::Undecided;
}

bool privilege_check(const Trace& trace) noexcept { return trace.privilege == Privilege::Administrator; }

void write_template(std::ostream& out, const ErrorTemplate& tmpl) {
  out << "# label=" << tmpl.label << "\nerror\n";
  std::array<char, 32> buf{};
  for (double e : tmpl.errors) {
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), e);
    out.write(buf.data(), ptr - buf.data());
    out << '\n';
  }
}

ErrorTemplate read_template(std::istream& in) {
  ErrorTemplate tmpl;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# label=", 0) != 0) {
    throw Error(ErrorCode::BadFormat, "template must start with '# label='");
  }
  tmpl.label = line.substr(8);
  if (!std::getline(in, line) || line != "error") throw Error(ErrorCode::BadFormat, "template missing 'error' column");
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size() || !std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::BadFormat, "template line " + std::to_string(line_no) + ": bad error value");
    }
    tmpl.errors.push_back(v);
  }
  if (tmpl.errors.size() < 2) throw Error(ErrorCode::BadFormat, "template needs at least two errors");
  return tmpl;
}

void save_template(const std::string& path, const ErrorTemplate& tmpl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_template(out, tmpl);
}

ErrorTemplate load_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_template(in);
}

}  // namespace hpcsentry
