// SPDX-License-Identifier: Apache-2.0
//
// # interval_ms=<int> privilege=<User|Administrator> regime=<label|none>
// tick,elapsed_ms,instructions,cache_references,cache_misses,branches,branch_misses
// 0,10,20000512,...
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hpcsentry/error.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {
namespace {

constexpr std::string_view kColumnHeader =
    "tick,elapsed_ms,instructions,cache_references,cache_misses,branches,branch_misses";

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

[[noreturn]] void bad(std::size_t line_no, const std::string& msg) {
  throw Error(ErrorCode::BadFormat, "trace line " + std::to_string(line_no) + ": " + msg);
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
    bad(line_no, "bad number '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  out << "# interval_ms=" << trace.sampling_interval_ms << " privilege=" << to_string(trace.privilege)
      << " regime=" << (trace.regime_label ? to_string(*trace.regime_label) : std::string_view("none")) << '\n';
  out << kColumnHeader << '\n';
  for (const auto& s : trace.samples) {
    out << s.tick_index << ',' << shortest(s.elapsed_ms);
    for (auto c : s.counts) out << ',' << c;
    out << '\n';
  }
}

std::string format_trace(const Trace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) bad(1, "missing header");
  ++line_no;
  {
    std::istringstream header(line);
    std::string hash;
    header >> hash;
    if (hash != "#") bad(line_no, "header must start with '# '");
    bool have_interval = false, have_privilege = false, have_regime = false;
    std::string field;
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) bad(line_no, "header field '" + field + "' lacks '='");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "interval_ms") {
        trace.sampling_interval_ms = parse_number<int>(value, line_no);
        have_interval = true;
      } else if (key == "privilege") {
        trace.privilege = privilege_from_string(value);
        have_privilege = true;
      } else if (key == "regime") {
        if (value == "none") {
          trace.regime_label.reset();
        } else {
          trace.regime_label = regime_from_string(value);
        }
        have_regime = true;
      }
    }
    if (!have_interval || !have_privilege || !have_regime) {
      bad(line_no, "header needs interval_ms, privilege and regime");
    }
    if (trace.sampling_interval_ms <= 0) bad(line_no, "interval_ms must be positive");
  }

  if (!std::getline(in, line)) bad(2, "missing column header");
  ++line_no;
  if (line != kColumnHeader) bad(line_no, "unexpected column header");

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string_view, 2 + kChannels> fields{};
    std::string_view rest(line);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto comma = rest.find(',');
      if (f + 1 < fields.size()) {
        if (comma == std::string_view::npos) bad(line_no, "expected 7 fields");
        fields[f] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) bad(line_no, "expected 7 fields");
        fields[f] = rest;
      }
    }
    CounterSample s;
    s.tick_index = parse_number<std::uint64_t>(fields[0], line_no);
    s.elapsed_ms = parse_number<double>(fields[1], line_no);
    for (std::size_t c = 0; c < kChannels; ++c) s.counts[c] = parse_number<std::uint64_t>(fields[2 + c], line_no);
    if (s.tick_index != trace.samples.size()) bad(line_no, "tick out of sequence");
    if (!trace.samples.empty() && !(s.elapsed_ms > trace.samples.back().elapsed_ms)) {
      bad(line_no, "elapsed_ms not increasing");
    }
    trace.samples.push_back(s);
  }
  return trace;
}

Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_trace(in);
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_trace(out, trace);
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  Trace t = read_trace(in);
  t.source = path;
  return t;
}

}  // namespace hpcsentry
