// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>

#include "hpcsentry/error.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail(ErrorCode code, std::size_t line_no, const std::string& msg) {
  throw Error(code, "line " + std::to_string(line_no) + ": " + msg);
}

std::optional<double> parse_seconds(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  bool seen_dot = false;
  bool seen_digit = false;
  for (char ch : tok) {
    if (ch == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
    } else if (ch >= '0' && ch <= '9') {
      seen_digit = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
  return value;
}

// Digits with optional ',' thousands separators ("12,345"), no sign.
std::optional<std::uint64_t> parse_count(std::string_view tok) {
  if (tok.empty() || tok.front() == ',' || tok.back() == ',') return std::nullopt;
  std::uint64_t value = 0;
  std::size_t group = 0;
  bool grouped = false;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const char ch = tok[i];
    if (ch == ',') {
      if (grouped ? group != 3 : group > 3) return std::nullopt;
      if (group == 0) return std::nullopt;
      grouped = true;
      group = 0;
      continue;
    }
    if (ch < '0' || ch > '9') return std::nullopt;
    const std::uint64_t digit = static_cast<std::uint64_t>(ch - '0');
    if (value > (UINT64_MAX - digit) / 10) return std::nullopt;
    value = value * 10 + digit;
    ++group;
  }
  if (grouped && group != 3) return std::nullopt;
  return value;
}

std::optional<std::size_t> event_channel(std::string_view name) {
  // perf appends modifiers such as ":u" or ":k".
  if (auto colon = name.find(':'); colon != std::string_view::npos) name = name.substr(0, colon);
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (name == kPerfEventNames[c]) return c;
  }
  return std::nullopt;
}

struct OpenGroup {
  double seconds = 0.0;
  std::size_t first_line = 0;
  CounterVector counts{};
  std::array<bool, kChannels> seen{};
};

}  // namespace

Trace parse_perf_interval_output(std::string_view text) {
  Trace trace;
  trace.source = "perf-stat";
  std::optional<OpenGroup> group;
  std::optional<double> last_seconds;

  auto close_group = [&](std::size_t line_no) {
    if (!group) return;
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (!group->seen[c]) {
        fail(ErrorCode::IncompleteGroup, line_no,
             "timestamp starting at line " + std::to_string(group->first_line) + " is missing event '" +
                 std::string(kPerfEventNames[c]) + "'");
      }
    }
    CounterSample s;
    s.tick_index = trace.samples.size();
    s.elapsed_ms = group->seconds * 1000.0;
    s.counts = group->counts;
    trace.samples.push_back(s);
    last_seconds = group->seconds;
    group.reset();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    if (tokens.size() < 3) fail(ErrorCode::MalformedLine, line_no, "expected '<seconds> <value> <event>'");

    const auto seconds = parse_seconds(tokens[0]);
    if (!seconds) fail(ErrorCode::MalformedLine, line_no, "bad timestamp '" + std::string(tokens[0]) + "'");

    std::uint64_t value = 0;
    std::size_t event_index = 2;
    if (tokens[1] == "<not") {
      if (tokens.size() < 4 || tokens[2] != "counted>") {
        fail(ErrorCode::MalformedLine, line_no, "expected '<not counted>'");
      }
      event_index = 3;
    } else if (auto count = parse_count(tokens[1])) {
      value = *count;
    } else {
      fail(ErrorCode::MalformedLine, line_no, "bad counter value '" + std::string(tokens[1]) + "'");
    }

    const auto channel = event_channel(tokens[event_index]);
    if (!channel) {
      fail(ErrorCode::UnsupportedEvent, line_no, "event '" + std::string(tokens[event_index]) + "'");
    }

    if (group && group->seconds != *seconds) close_group(line_no);
    if (!group) {
      if (last_seconds && !(*seconds > *last_seconds)) {
        fail(ErrorCode::NonMonotonicTime, line_no,
             "timestamp " + std::string(tokens[0]) + " does not advance");
      }
      group = OpenGroup{*seconds, line_no, {}, {}};
    }
    if (group->seen[*channel]) {
      fail(ErrorCode::MalformedLine, line_no, "duplicate event '" + std::string(kPerfEventNames[*channel]) + "'");
    }
    group->seen[*channel] = true;
    group->counts[*channel] = value;

    if (eol == text.size()) break;
  }
  close_group(line_no);

  if (trace.samples.size() >= 2) {
    const double step = trace.samples[1].elapsed_ms - trace.samples[0].elapsed_ms;
    trace.sampling_interval_ms = std::max(1, static_cast<int>(std::lround(step)));
  }
  return trace;
}

}  // namespace hpcsentry
