#pragma once

// Builders and trace-level oracles shared by the unit and acceptance tests.
// The oracles read only the trace, never engine internals.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ooe/engine.hpp"

namespace ooe::test {

inline Task make_task(std::string id, Tick C, Tick T, Importance I,
                      std::uint32_t line, std::uint32_t n, Tick W,
                      ResponseOption response = ResponseOption::ReleaseAll,
                      std::optional<Tick> D = std::nullopt) {
  Task t;
  t.id = std::move(id);
  t.wcet = C;
  t.period = T;
  t.deadline = D.value_or(T);
  t.importance = I;
  t.line = LineId{line};
  t.envelope_n = n;
  t.envelope_w = W;
  t.response = response;
  return t;
}

inline TaskSet make_set(std::vector<Task> tasks) {
  TaskSet ts;
  ts.explicit_priority.assign(tasks.size(), std::nullopt);
  ts.overrides.assign(tasks.size(), {});
  ts.tasks = std::move(tasks);
  return ts;
}

enum class TwoTask { ImportanceMonotonic, Override, OverrideOutOfEnvelope };

// tau_l = (C 2, T 3, I 1), tau_h = (C 2, T 6, I 2). The override variants give
// tau_l's first job per hyperperiod the top priority.
inline Scenario two_task(TwoTask variant, Tick horizon = 6) {
  Scenario sc;
  sc.tasks = make_set({make_task("tau_l", 2, 3, 1, 1, 1, 3),
                       make_task("tau_h", 2, 6, 2, 2, 2, 6)});
  if (variant != TwoTask::ImportanceMonotonic) {
    sc.policy.assignment = Assignment::Explicit;
    sc.tasks.explicit_priority = {1, 2};
    sc.tasks.overrides[0] = {{0, 100}};
  }
  sc.workload.push_back({LineId{1}, Periodic{0, 3}});
  if (variant == TwoTask::OverrideOutOfEnvelope)
    sc.workload.push_back({LineId{2}, Explicit{{0, 3}}});
  else
    sc.workload.push_back({LineId{2}, Periodic{0, 6}});
  sc.horizon = horizon;
  return sc;
}

// Random scenario for property suites: up to 4 tasks, horizon up to 200,
// every policy switch exercised.
inline Scenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  auto chance = [&](int percent) { return pick(1, 100) <= percent; };

  Scenario sc;
  const auto n_tasks = pick(1, 4);
  std::vector<Importance> importances;
  for (Importance i = 1; i <= 8; ++i) importances.push_back(i);
  std::shuffle(importances.begin(), importances.end(), rng);

  std::vector<Task> tasks;
  for (std::int64_t i = 0; i < n_tasks; ++i) {
    const bool exception_only = chance(10);
    const Tick T = exception_only ? kInfinite : pick(2, 12);
    const Tick D = exception_only ? pick(2, 10) : T;
    const Tick C = pick(1, std::max<Tick>(1, D / 3));
    const auto n = static_cast<std::uint32_t>(pick(1, 3));
    const Tick W = exception_only ? pick(2, 12) : pick(1, 2 * T);
    const auto response =
        chance(25) ? ResponseOption::NotifyRunning : ResponseOption::ReleaseAll;
    tasks.push_back(make_task("t" + std::to_string(i), C, T,
                              importances[static_cast<std::size_t>(i)],
                              static_cast<std::uint32_t>(i + 1), n, W, response,
                              D));
  }
  sc.tasks = make_set(tasks);
  if (chance(30)) {
    sc.policy.assignment = Assignment::Explicit;
    std::vector<Priority> prios(tasks.size());
    for (std::size_t i = 0; i < prios.size(); ++i) prios[i] = static_cast<Priority>(i);
    std::shuffle(prios.begin(), prios.end(), rng);
    for (std::size_t i = 0; i < prios.size(); ++i) sc.tasks.explicit_priority[i] = prios[i];
  }
  sc.policy.fault_policy = chance(50) ? FaultPolicy::Permanent : FaultPolicy::AutoResume;
  sc.policy.ipl_optimization = chance(35);
  sc.policy.mask_until_bottom_half = chance(35);
  sc.policy.delta_th = pick(0, 1);
  const Tick horizon = pick(20, 200);
  sc.horizon = horizon;
  sc.seed = rng();

  for (const auto& t : tasks) {
    const Tick base = t.exception_only() ? 10 : t.period;
    switch (pick(0, 4)) {
      case 0:
        sc.workload.push_back({t.line, Periodic{pick(0, base - 1), base}});
        break;
      case 1:
        sc.workload.push_back(
            {t.line, Sporadic{pick(1, base), static_cast<double>(pick(10, 100)) / 100.0,
                              std::nullopt}});
        break;
      case 2:
        sc.workload.push_back({t.line, Periodic{0, base}});
        sc.workload.push_back(
            {t.line, Burst{pick(0, horizon - 1), static_cast<std::uint32_t>(pick(2, 8)),
                           pick(0, 2)}});
        break;
      case 3:
        sc.workload.push_back(
            {t.line, Storm{pick(0, horizon / 2), static_cast<double>(pick(5, 30)) / 10.0,
                           pick(1, 2 * t.envelope_w)}});
        break;
      default: {
        Explicit e;
        const auto count = pick(0, horizon / 2);
        for (std::int64_t k = 0; k < count; ++k) e.times.push_back(pick(0, horizon - 1));
        std::sort(e.times.begin(), e.times.end());
        sc.workload.push_back({t.line, e});
      }
    }
  }
  return sc;
}

inline std::vector<const TraceRecord*> records_of(const Trace& trace, RecordKind kind,
                                                  std::optional<LineId> line = {}) {
  std::vector<const TraceRecord*> out;
  for (const auto& r : trace.records())
    if (r.kind == kind && (!line || r.line == line)) out.push_back(&r);
  return out;
}

// Largest number of INTERNALIZE records for one line inside any (t - W, t],
// measured on assigned timestamps (ts=) or on record times.
inline std::size_t max_window_load(const Trace& trace, LineId line, Tick W,
                                   bool use_stamps) {
  std::vector<Tick> times;
  for (const auto* r : records_of(trace, RecordKind::Internalize, line))
    times.push_back(use_stamps ? std::stoll(*detail_value(*r, "ts")) : r->time);
  std::sort(times.begin(), times.end());
  std::size_t best = 0;
  for (std::size_t hi = 0, lo = 0; hi < times.size(); ++hi) {
    while (times[lo] <= times[hi] - W) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  return best;
}

// Lines where the window bound is exceeded.
inline std::vector<LineId> window_violations(const Scenario& sc, const Trace& trace) {
  std::vector<LineId> bad;
  for (const auto& t : sc.tasks.tasks)
    if (max_window_load(trace, t.line, t.envelope_w, true) > t.envelope_n)
      bad.push_back(t.line);
  return bad;
}

// Per line: RAISE - (INTERNALIZE + counter-only SUPPRESS). Held suppressions
// are excluded; they resolve into one of the other two later in the trace.
inline std::map<LineId, std::int64_t> conservation_gap(const Trace& trace) {
  std::map<LineId, std::int64_t> gap;
  for (const auto& r : trace.records()) {
    if (!r.line || *r.line == kTimerLine) continue;
    if (r.kind == RecordKind::Raise) ++gap[*r.line];
    if (r.kind == RecordKind::Internalize) --gap[*r.line];
    if (r.kind == RecordKind::Suppress && !detail_has(r, "held")) --gap[*r.line];
  }
  std::erase_if(gap, [](const auto& kv) { return kv.second == 0; });
  return gap;
}

}  // namespace ooe::test
