#include "ooe/feasibility.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

namespace ooe {

const char* to_string(JobVerdict v) {
  switch (v) {
    case JobVerdict::Completed: return "completed";
    case JobVerdict::Missed: return "missed";
    case JobVerdict::Dropped: return "dropped";
    case JobVerdict::Unfinished: return "unfinished";
  }
  return "?";
}

namespace {

// Detector state for one line. Patterns never exceed n per W, so the window
// mask can never observe a masked occurrence and no fault arises.
struct LineModel {
  std::deque<Tick> stamps;
  bool ooe = false;
  bool masked = false;
  Tick unmask_at = 0;
  std::optional<Tick> last;
  std::optional<Tick> last_gap;
  std::optional<Tick> last_close;
};

struct SimJob {
  JobOutcome out;
  Tick remaining = 0;
  bool ooe = false;
  bool displaced = false;
  bool live = true;
};

bool less_by_task_seq(const JobOutcome& a, const JobOutcome& b) {
  return std::tie(a.task, a.seq) < std::tie(b.task, b.seq);
}

}  // namespace

std::vector<JobOutcome> simulate_pattern(const TaskSet& ts,
                                         const PriorityMap& priorities,
                                         const ReleasePattern& pattern,
                                         Tick end) {
  const std::size_t n_tasks = ts.tasks.size();
  std::vector<LineModel> lines(n_tasks);
  std::vector<SimJob> jobs;
  std::vector<std::uint32_t> next_seq(n_tasks, 0);
  std::vector<std::size_t> cursor(n_tasks, 0);

  // Delivery order: more important line first, then lower line id.
  std::vector<std::size_t> order(n_tasks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = ts.tasks[a];
    const auto& y = ts.tasks[b];
    if (x.importance != y.importance) return x.importance > y.importance;
    return x.line < y.line;
  });
  std::vector<std::size_t> lex(n_tasks);
  std::iota(lex.begin(), lex.end(), 0);
  std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) {
    return ts.tasks[a].id < ts.tasks[b].id;
  });
  std::vector<std::int64_t> lex_rank(n_tasks);
  for (std::size_t r = 0; r < n_tasks; ++r) lex_rank[lex[r]] = -std::int64_t(r);

  auto elevated = [&](std::size_t task) {
    if (lines[task].ooe) return true;
    for (const auto& j : jobs)
      if (j.live && j.out.task == task && j.ooe) return true;
    return false;
  };

  for (Tick t = 0; t <= end; ++t) {
    for (auto& j : jobs) {
      if (!j.live || j.out.deadline > t) continue;
      j.live = false;
      j.out.verdict = j.displaced ? JobVerdict::Dropped : JobVerdict::Missed;
      j.out.finished = t;
    }

    for (std::size_t i = 0; i < n_tasks; ++i) {
      auto& l = lines[i];
      if (!l.masked || l.unmask_at > t) continue;
      l.masked = false;
      const Tick T = ts.tasks[i].period;
      if (l.ooe && T != kInfinite && l.last_gap && *l.last_gap >= T)
        l.ooe = false;
    }

    for (std::size_t i = 0; i < n_tasks; ++i) {
      auto& l = lines[i];
      if (!l.ooe || l.masked || !l.last_close) continue;
      const auto& task = ts.tasks[i];
      const Tick span = task.exception_only()
                            ? task.envelope_w
                            : std::max(task.period, task.envelope_w);
      if (*l.last_close <= t - span) l.ooe = false;
    }

    if (t < end) {
      for (std::size_t i : order) {
        const auto& times = pattern.at(i);
        if (cursor[i] >= times.size() || times[cursor[i]] != t) continue;
        ++cursor[i];
        const auto& task = ts.tasks[i];
        auto& l = lines[i];
        if (l.masked) continue;  // unreachable for enveloped patterns

        while (!l.stamps.empty() && l.stamps.front() <= t - task.envelope_w)
          l.stamps.pop_front();
        bool close = task.exception_only();
        if (l.last) {
          l.last_gap = t - *l.last;
          close = close || *l.last_gap < task.period;
        }
        l.stamps.push_back(t);
        l.last = t;
        if (close) {
          l.last_close = t;
          l.ooe = true;
        }
        if (l.stamps.size() >= task.envelope_n) {
          l.masked = true;
          l.unmask_at = std::max(l.stamps.front() + task.envelope_w, t);
          while (l.stamps.size() > task.envelope_n) l.stamps.pop_front();
        } else if (l.ooe && !close) {
          l.ooe = false;
        }

        SimJob* target = nullptr;
        if (task.response == ResponseOption::NotifyRunning) {
          for (auto& j : jobs)
            if (j.live && j.out.task == i &&
                (!target || j.out.seq > target->out.seq))
              target = &j;
        }
        if (target) {
          target->ooe = target->ooe || l.ooe;
          continue;
        }
        SimJob j;
        j.out.task = i;
        j.out.seq = next_seq[i]++;
        j.out.release = t;
        j.out.deadline = t + task.deadline;
        j.remaining = task.wcet;
        j.ooe = l.ooe;
        jobs.push_back(j);
      }
    }
    if (t == end) break;

    SimJob* best = nullptr;
    JobRank best_rank;
    for (auto& j : jobs) {
      if (!j.live) continue;
      JobRank r;
      r.id_order = lex_rank[j.out.task];
      r.seq_order = -std::int64_t(j.out.seq);
      if (elevated(j.out.task)) {
        r.band = 1;
        r.band_importance = ts.tasks[j.out.task].importance;
      } else {
        r.priority = priorities.priority_of(j.out.task, j.out.seq);
      }
      if (!best || r > best_rank) {
        best = &j;
        best_rank = r;
      }
    }
    if (!best) continue;
    if (best_rank.band == 1) {
      for (auto& o : jobs)
        if (o.live && &o != best && o.out.release <= t &&
            ts.tasks[o.out.task].importance < ts.tasks[best->out.task].importance)
          o.displaced = true;
    }
    if (--best->remaining == 0) {
      best->live = false;
      best->out.verdict = JobVerdict::Completed;
      best->out.finished = t + 1;
    }
  }

  std::vector<JobOutcome> out;
  out.reserve(jobs.size());
  for (const auto& j : jobs) out.push_back(j.out);
  std::sort(out.begin(), out.end(), less_by_task_seq);
  return out;
}

ReleasePattern normal_pattern(const TaskSet& ts, Tick horizon) {
  ReleasePattern p(ts.tasks.size());
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& task = ts.tasks[i];
    if (task.exception_only()) continue;
    for (Tick t = 0; t < horizon; t += task.period) p[i].push_back(t);
  }
  return p;
}

Tick pattern_end(const TaskSet& ts, Tick horizon) {
  Tick d = 0;
  for (const auto& t : ts.tasks) d = std::max(d, t.deadline);
  return horizon + d;
}

NormalResult check_normal(const TaskSet& ts, const PriorityMap& priorities,
                          std::optional<Tick> horizon) {
  const Tick h = horizon.value_or(hyperperiod(ts));
  NormalResult r;
  r.jobs = simulate_pattern(ts, priorities, normal_pattern(ts, h),
                            pattern_end(ts, h));
  for (const auto& j : r.jobs) {
    if (j.verdict != JobVerdict::Missed) continue;
    if (!r.first_miss || *j.finished < *r.first_miss->finished)
      r.first_miss = j;
  }
  r.schedulable = !r.first_miss;
  return r;
}

std::vector<std::vector<Tick>> enumerate_task_patterns(const Task& task,
                                                       Tick horizon,
                                                       std::uint64_t limit) {
  std::vector<bool> required(static_cast<std::size_t>(horizon), false);
  if (!task.exception_only())
    for (Tick t = 0; t < horizon; t += task.period)
      required[static_cast<std::size_t>(t)] = true;

  std::vector<std::vector<Tick>> out;
  std::vector<Tick> chosen;
  auto fits = [&](Tick t) {
    std::size_t in_window = 1;
    for (auto it = chosen.rbegin(); it != chosen.rend() && *it > t - task.envelope_w;
         ++it)
      ++in_window;
    return in_window <= task.envelope_n;
  };
  // Depth-first over ticks; "no extra event" is tried before "extra event",
  // which puts the normal pattern first.
  auto rec = [&](auto& self, Tick t) -> void {
    if (t == horizon) {
      if (out.size() >= limit)
        throw BoundsExceeded("more than " + std::to_string(limit) +
                             " release patterns for task '" + task.id + "'");
      out.push_back(chosen);
      return;
    }
    const bool req = required[static_cast<std::size_t>(t)];
    if (!req) self(self, t + 1);
    if (fits(t)) {
      chosen.push_back(t);
      self(self, t + 1);
      chosen.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

FeasibilityResult check_ooe_feasible(const Scenario& sc, Bounds bounds,
                                     std::optional<Tick> horizon) {
  if (auto diag = validate_scenario(sc); !diag.empty())
    throw ScenarioError(std::move(diag));
  const TaskSet& ts = sc.tasks;
  if (ts.tasks.size() > bounds.max_tasks)
    throw BoundsExceeded("instance has " + std::to_string(ts.tasks.size()) +
                         " tasks; the exhaustive check handles at most " +
                         std::to_string(bounds.max_tasks));
  if (sc.policy.delta_th != 0 || sc.policy.ipl_optimization ||
      sc.policy.mask_until_bottom_half)
    throw BoundsExceeded(
        "the exhaustive check models delta_th = 0 without IPL optimization or "
        "bottom-half masking");
  const Tick h = horizon.value_or(hyperperiod(ts));
  if (h < 1 || h > bounds.max_horizon)
    throw BoundsExceeded("horizon " + std::to_string(h) +
                         " is outside the exhaustive check limit of " +
                         std::to_string(bounds.max_horizon) + " ticks");

  const PriorityMap prio = priorities_for(sc);
  std::vector<std::vector<std::vector<Tick>>> per_task;
  std::uint64_t total = 1;
  for (const auto& task : ts.tasks) {
    per_task.push_back(enumerate_task_patterns(task, h, bounds.max_patterns));
    if (per_task.back().empty())
      throw BoundsExceeded("normal releases of task '" + task.id +
                           "' already exceed n per W");
    total *= per_task.back().size();
    if (total > bounds.max_patterns)
      throw BoundsExceeded("more than " + std::to_string(bounds.max_patterns) +
                           " combined release patterns");
  }

  FeasibilityResult res;
  const Tick end = pattern_end(ts, h);
  std::vector<std::size_t> idx(ts.tasks.size(), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    ReleasePattern pattern(ts.tasks.size());
    for (std::size_t i = 0; i < ts.tasks.size(); ++i)
      pattern[i] = per_task[i][idx[i]];

    auto jobs = simulate_pattern(ts, prio, pattern, end);
    ++res.patterns_checked;
    for (const auto& j : jobs) {
      if (j.verdict != JobVerdict::Missed) continue;
      if (k != 0 && ts.tasks[j.task].response == ResponseOption::NotifyRunning)
        continue;
      res.feasible = false;
      res.pattern_index = k;
      res.pattern = pattern;
      res.offending = j;
      res.jobs = std::move(jobs);
      return res;
    }

    // Odometer: last task varies fastest.
    for (std::size_t i = ts.tasks.size(); i-- > 0;) {
      if (++idx[i] < per_task[i].size()) break;
      idx[i] = 0;
    }
  }
  return res;
}

Scenario pattern_scenario(const Scenario& sc, const ReleasePattern& pattern,
                          Tick horizon) {
  Scenario out = sc;
  out.workload.clear();
  for (std::size_t i = 0; i < sc.tasks.tasks.size(); ++i)
    out.workload.push_back({sc.tasks.tasks[i].line, Explicit{pattern.at(i)}});
  out.horizon = pattern_end(sc.tasks, horizon);
  return out;
}

std::vector<JobOutcome> engine_outcomes(const Scenario& sc,
                                        const RunResult& run) {
  std::map<std::pair<std::size_t, std::uint32_t>, JobOutcome> jobs;
  for (const auto& r : run.trace.records()) {
    if (!r.job) continue;
    const auto task = sc.tasks.index_of(r.task);
    if (!task) continue;
    const std::pair key{*task, *r.job - 1};
    switch (r.kind) {
      case RecordKind::Release: {
        JobOutcome o;
        o.task = *task;
        o.seq = *r.job - 1;
        o.release = r.time;
        o.deadline = std::stoll(detail_value(r, "deadline").value_or("0"));
        jobs[key] = o;
        break;
      }
      case RecordKind::Complete:
        jobs[key].verdict = JobVerdict::Completed;
        jobs[key].finished = r.time;
        break;
      case RecordKind::Miss:
        jobs[key].verdict = JobVerdict::Missed;
        jobs[key].finished = r.time;
        break;
      case RecordKind::Drop:
        jobs[key].verdict = JobVerdict::Dropped;
        jobs[key].finished = r.time;
        break;
      default:
        break;
    }
  }
  std::vector<JobOutcome> out;
  for (auto& [k, o] : jobs) out.push_back(o);
  return out;
}

}  // namespace ooe
