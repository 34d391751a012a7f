// SPDX-License-Identifier: Apache-2.0
//
// Independent recoverability rule for open/encrypt scenarios, and an
// enumerator of small scenarios up to relabelling of file ids.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "hpcsentry/recovery.hpp"

namespace oracle {

using hpcsentry::ScenarioAction;
using hpcsentry::ScenarioStep;

/// Encrypted files whose last plain open t0 is followed by fewer than
/// `capacity` plain opens of other files, with the verdict less than
/// `quantum` ticks after t0. Steps must be open/encrypt rows only.
inline std::set<std::uint64_t> recoverable(const std::vector<ScenarioStep>& steps, std::size_t capacity,
                                           std::int64_t quantum, std::int64_t verdict_tick) {
  std::set<std::uint64_t> encrypted;
  for (const auto& s : steps) {
    if (s.action == ScenarioAction::Encrypt) encrypted.insert(s.file_id);
  }
  std::set<std::uint64_t> out;
  for (auto f : encrypted) {
    std::int64_t t0 = -1;
    std::size_t pos0 = 0;
    bool plain = true;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i].file_id != f) continue;
      if (steps[i].action == ScenarioAction::Encrypt) plain = false;
      if (steps[i].action == ScenarioAction::Open && plain) {
        t0 = steps[i].tick;
        pos0 = i;
      }
    }
    if (t0 < 0) continue;
    std::set<std::uint64_t> others;
    std::map<std::uint64_t, bool> is_encrypted;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto id = steps[i].file_id;
      if (steps[i].action == ScenarioAction::Encrypt) is_encrypted[id] = true;
      if (i > pos0 && steps[i].action == ScenarioAction::Open && id != f && !is_encrypted[id]) others.insert(id);
    }
    if (others.size() < capacity && verdict_tick - t0 < quantum) out.insert(f);
  }
  return out;
}

/// Calls `visit` for every open/encrypt sequence of exactly `len` rows over at
/// most `max_files` files, with ids introduced in order 1, 2, ... (each
/// relabelling class once). Row i happens at tick i.
inline std::size_t enumerate_scenarios(std::size_t len, std::size_t max_files,
                                       const std::function<void(const std::vector<ScenarioStep>&)>& visit) {
  std::vector<ScenarioStep> steps;
  std::size_t count = 0;
  std::function<void(std::uint64_t)> rec = [&](std::uint64_t used) {
    if (steps.size() == len) {
      visit(steps);
      ++count;
      return;
    }
    const std::uint64_t limit = std::min<std::uint64_t>(used + 1, max_files);
    for (std::uint64_t f = 1; f <= limit; ++f) {
      for (auto a : {ScenarioAction::Open, ScenarioAction::Encrypt}) {
        steps.push_back({static_cast<std::int64_t>(steps.size()), a, f});
        rec(std::max(used, f));
        steps.pop_back();
      }
    }
  };
  rec(0);
  return count;
}

}  // namespace oracle
