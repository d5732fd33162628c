#include "ooe/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ooe {

bool is_final(JobState s) {
  return s == JobState::Completed || s == JobState::Missed ||
         s == JobState::Dropped;
}

PriorityMap::PriorityMap(std::vector<Priority> base,
                         std::vector<std::vector<JobPriorityOverride>> overrides,
                         std::vector<std::uint32_t> modulus)
    : base_(std::move(base)),
      overrides_(std::move(overrides)),
      modulus_(std::move(modulus)) {
  overrides_.resize(base_.size());
  modulus_.resize(base_.size(), 1);
}

Priority PriorityMap::priority_of(std::size_t task, std::uint32_t seq) const {
  const auto& ov = overrides_.at(task);
  if (!ov.empty()) {
    const std::uint32_t k = std::max<std::uint32_t>(modulus_.at(task), 1);
    for (const auto& o : ov) {
      if (seq % k == o.residue) return o.priority;
    }
  }
  return base_.at(task);
}

std::optional<std::size_t> TaskSet::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TaskSet::task_on_line(LineId line) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].line == line) return i;
  }
  return std::nullopt;
}

bool ValidationReport::mentions(const std::string& text) const {
  return std::any_of(problems.begin(), problems.end(), [&](const Violation& v) {
    return v.message.find(text) != std::string::npos;
  });
}

ValidationReport validate_task_set(const TaskSet& ts) {
  ValidationReport report;
  auto flag = [&](const std::string& task, std::string msg) {
    report.problems.push_back({task, std::move(msg)});
  };

  std::set<std::string> ids;
  std::map<Importance, std::string> importance_owner;
  std::map<std::uint32_t, std::string> line_owner;

  for (const auto& t : ts.tasks) {
    if (t.id.empty()) flag(t.id, "empty task id");
    if (!ids.insert(t.id).second) flag(t.id, "duplicate task id");

    if (auto [it, fresh] = importance_owner.emplace(t.importance, t.id); !fresh)
      flag(t.id, "duplicate importance (shared with " + it->second + ")");

    if (t.line == kTimerLine) {
      flag(t.id, "line id is reserved for the timer");
    } else if (auto [it, fresh] = line_owner.emplace(t.line.value, t.id);
               !fresh) {
      flag(t.id, "line collision (shared with " + it->second + ")");
    }

    if (t.wcet < 1) flag(t.id, "C must be at least 1");
    if (t.period <= 0) flag(t.id, "zero period");
    if (t.deadline < 1) flag(t.id, "D must be at least 1");
    if (t.deadline == kInfinite) flag(t.id, "D must be finite");
    if (t.wcet > t.deadline) flag(t.id, "C exceeds D");
    if (t.period > 0 && t.deadline > t.period) flag(t.id, "D exceeds T");
    if (t.envelope_n < 1) flag(t.id, "n must be at least 1");
    if (t.envelope_w < 1 || t.envelope_w == kInfinite)
      flag(t.id, "W must be a positive finite duration");
  }

  if (!report.valid()) return report;

  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    if (i >= ts.overrides.size() || ts.overrides[i].empty()) continue;
    const auto& t = ts.tasks[i];
    if (t.exception_only()) {
      flag(t.id, "job priority overrides need a finite period");
      continue;
    }
    const std::uint32_t k = jobs_per_hyperperiod(ts, i);
    std::set<std::uint32_t> seen;
    for (const auto& o : ts.overrides[i]) {
      if (o.residue >= k)
        flag(t.id, "override residue " + std::to_string(o.residue) +
                       " out of range (jobs per hyperperiod " +
                       std::to_string(k) + ")");
      if (!seen.insert(o.residue).second)
        flag(t.id, "duplicate override residue");
    }
  }
  return report;
}

Rational utilization(const TaskSet& ts) {
  Rational u{0};
  for (const auto& t : ts.tasks) {
    if (t.exception_only()) continue;
    u += Rational{t.wcet, t.period};
  }
  return u;
}

Tick hyperperiod(const TaskSet& ts) {
  constexpr Tick kLimit = Tick{1} << 40;
  Tick h = 1;
  for (const auto& t : ts.tasks) {
    if (t.exception_only() || t.period <= 0) continue;
    h = std::lcm(h, t.period);
    if (h > kLimit) throw std::overflow_error("hyperperiod too large");
  }
  return h;
}

std::uint32_t jobs_per_hyperperiod(const TaskSet& ts, std::size_t task) {
  const auto& t = ts.tasks.at(task);
  if (t.exception_only()) return 1;
  return static_cast<std::uint32_t>(hyperperiod(ts) / t.period);
}

namespace {

std::vector<std::uint32_t> moduli(const TaskSet& ts) {
  std::vector<std::uint32_t> k(ts.tasks.size());
  for (std::size_t i = 0; i < ts.tasks.size(); ++i)
    k[i] = jobs_per_hyperperiod(ts, i);
  return k;
}

std::vector<std::vector<JobPriorityOverride>> padded_overrides(
    const TaskSet& ts) {
  auto ov = ts.overrides;
  ov.resize(ts.tasks.size());
  return ov;
}

}  // namespace

PriorityMap assign_importance_monotonic(const TaskSet& ts) {
  std::vector<std::size_t> order(ts.tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (ts.tasks[a].importance != ts.tasks[b].importance)
      return ts.tasks[a].importance < ts.tasks[b].importance;
    return ts.tasks[a].id > ts.tasks[b].id;
  });
  std::vector<Priority> base(ts.tasks.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    base[order[rank]] = static_cast<Priority>(rank + 1);
  return PriorityMap(std::move(base), padded_overrides(ts), moduli(ts));
}

PriorityMap assign_explicit(const TaskSet& ts) {
  std::vector<Priority> base(ts.tasks.size());
  std::set<Priority> seen;
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    if (i >= ts.explicit_priority.size() || !ts.explicit_priority[i])
      throw std::invalid_argument("task " + ts.tasks[i].id +
                                  ": explicit assignment needs a priority");
    base[i] = *ts.explicit_priority[i];
    if (!seen.insert(base[i]).second)
      throw std::invalid_argument("task " + ts.tasks[i].id +
                                  ": duplicate scheduler priority");
  }
  return PriorityMap(std::move(base), padded_overrides(ts), moduli(ts));
}

}  // namespace ooe
