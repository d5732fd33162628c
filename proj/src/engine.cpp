#include "ooe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ooe/scheduler.hpp"
#include "ooe/vic.hpp"

namespace ooe {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid scenario: " + join(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

Tick effective_horizon(const Scenario& sc) {
  if (sc.horizon) return *sc.horizon;
  Tick max_w = 0;
  for (const auto& t : sc.tasks.tasks) max_w = std::max(max_w, t.envelope_w);
  return 2 * hyperperiod(sc.tasks) + max_w;
}

PriorityMap priorities_for(const Scenario& sc) {
  return sc.policy.assignment == Assignment::Explicit
             ? assign_explicit(sc.tasks)
             : assign_importance_monotonic(sc.tasks);
}

std::vector<std::string> validate_scenario(const Scenario& sc) {
  std::vector<std::string> diag;
  const auto report = validate_task_set(sc.tasks);
  for (const auto& v : report.problems)
    diag.push_back("task '" + v.task + "': " + v.message);
  if (!report.valid()) return diag;

  if (sc.policy.assignment == Assignment::Explicit) {
    try {
      assign_explicit(sc.tasks);
    } catch (const std::exception& e) {
      diag.push_back(e.what());
    }
  }
  if (sc.policy.delta_th < 0) diag.push_back("policy.delta_th must be >= 0");
  if (sc.policy.ipl_optimization) {
    for (const auto& t : sc.tasks.tasks)
      if (t.importance < 1)
        diag.push_back("task '" + t.id +
                       "': ipl_optimization needs importance >= 1");
  }
  if (sc.horizon && *sc.horizon < 1) diag.push_back("horizon must be >= 1");

  for (std::size_t i = 0; i < sc.workload.size(); ++i) {
    const auto& w = sc.workload[i];
    const std::string where = "workload[" + std::to_string(i) + "]";
    if (!sc.tasks.task_on_line(w.line))
      diag.push_back(where + ": no task on line " +
                     std::to_string(w.line.value));
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Periodic>) {
            if (k.period < 1) diag.push_back(where + ": period must be >= 1");
            if (k.offset < 0) diag.push_back(where + ": offset must be >= 0");
          } else if constexpr (std::is_same_v<K, Sporadic>) {
            if (k.min_sep < 1) diag.push_back(where + ": min_sep must be >= 1");
            if (!(k.density > 0.0 && k.density <= 1.0))
              diag.push_back(where + ": density must be in (0, 1]");
          } else if constexpr (std::is_same_v<K, Burst>) {
            if (k.at < 0) diag.push_back(where + ": at must be >= 0");
            if (k.spacing < 0) diag.push_back(where + ": spacing must be >= 0");
          } else if constexpr (std::is_same_v<K, Storm>) {
            if (k.start < 0) diag.push_back(where + ": start must be >= 0");
            if (!(k.rate > 0.0)) diag.push_back(where + ": rate must be > 0");
            if (k.duration && *k.duration < 1)
              diag.push_back(where + ": duration must be >= 1");
          } else {
            for (Tick t : k.times)
              if (t < 0) diag.push_back(where + ": negative time");
          }
        },
        w.kind);
  }
  return diag;
}

std::vector<Tick> generate_workload(const WorkloadSpec& spec, Tick horizon,
                                    std::uint64_t seed) {
  std::vector<Tick> out;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Periodic>) {
          for (Tick t = k.offset; t < horizon; t += k.period) out.push_back(t);
        } else if constexpr (std::is_same_v<K, Sporadic>) {
          std::mt19937_64 rng(
              k.seed ? *k.seed : splitmix64(seed ^ (spec.line.value + 1)));
          Tick t = 0;
          while (t < horizon) {
            // 53 random bits mapped to [0, 1); avoids library-specific
            // distribution algorithms.
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < k.density) {
              out.push_back(t);
              t += k.min_sep;
            } else {
              ++t;
            }
          }
        } else if constexpr (std::is_same_v<K, Burst>) {
          for (std::uint32_t i = 0; i < k.count; ++i) {
            const Tick t = k.at + static_cast<Tick>(i) * k.spacing;
            if (t < horizon) out.push_back(t);
          }
        } else if constexpr (std::is_same_v<K, Storm>) {
          const Tick duration = k.duration.value_or(horizon - k.start);
          if (duration <= 0) return;
          const auto count = static_cast<Tick>(
              std::llround(k.rate * static_cast<double>(duration)));
          for (Tick i = 0; i < count; ++i) {
            const Tick t = k.start + (i * duration) / count;
            if (t < horizon) out.push_back(t);
          }
        } else {
          for (Tick t : k.times)
            if (t >= 0 && t < horizon) out.push_back(t);
        }
      },
      spec.kind);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Metrics::alarm_count(AlarmKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      alarms.begin(), alarms.end(), [&](const Alarm& a) { return a.kind == kind; }));
}

std::uint64_t Metrics::total_misses() const {
  std::uint64_t n = 0;
  for (const auto& [id, t] : tasks) n += t.misses;
  return n;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["horizon"] = m.horizon;
  auto& tasks = j["tasks"] = nlohmann::ordered_json::object();
  for (const auto& [id, t] : m.tasks) {
    tasks[id] = {{"released", t.released},
                 {"completed", t.completed},
                 {"misses", t.misses},
                 {"drops", t.drops},
                 {"notifications", t.notifications},
                 {"unfinished", t.unfinished},
                 {"max_response", t.max_response},
                 {"avg_response", t.avg_response}};
  }
  auto& lines = j["lines"] = nlohmann::ordered_json::object();
  for (const auto& [id, l] : m.lines) {
    lines[std::to_string(id)] = {{"raised", l.raised},
                                 {"internalized", l.internalized},
                                 {"suppressed", l.suppressed},
                                 {"held", l.held},
                                 {"top_half", l.top_half},
                                 {"final_state", to_string(l.final_state)}};
  }
  auto& alarms = j["alarms"] = nlohmann::ordered_json::array();
  for (const auto& a : m.alarms)
    alarms.push_back(
        {{"time", a.time}, {"line", a.line.value}, {"kind", to_string(a.kind)}});
  auto& counts = j["alarm_counts"] = nlohmann::ordered_json::object();
  for (auto k : {AlarmKind::OutOfEnvelopeEntered, AlarmKind::WindowBoundReached,
                 AlarmKind::SensorFault, AlarmKind::SensorResumed})
    counts[to_string(k)] = m.alarm_count(k);
  j["total_top_half"] = m.total_top_half;
  j["mask_updates"] = m.mask_updates;
  j["ipl_updates"] = m.ipl_updates;
  return j.dump(2) + "\n";
}

namespace {

struct Raise {
  Tick time;
  std::int64_t irq_priority;
  LineId line;
};

class Simulation {
 public:
  explicit Simulation(const Scenario& sc)
      : sc_(sc),
        ts_(sc.tasks),
        horizon_(effective_horizon(sc)),
        sched_(ts_, priorities_for(sc), sc.policy.delta_th, &trace_) {
    for (std::size_t i = 0; i < ts_.tasks.size(); ++i) {
      const auto& t = ts_.tasks[i];
      vic_.add_line(t.line, t.importance);
      monitors_.emplace_back(MonitorConfig{t.line, t.period, t.envelope_w,
                                           t.envelope_n,
                                           sc.policy.fault_policy});
      line_task_[t.line] = i;
    }
    for (const auto& w : sc.workload) {
      const auto& task = ts_.tasks[line_task_.at(w.line)];
      for (Tick t : generate_workload(w, horizon_, sc.seed))
        raises_.push_back({t, task.importance, w.line});
    }
    std::stable_sort(raises_.begin(), raises_.end(),
                     [](const Raise& a, const Raise& b) {
                       if (a.time != b.time) return a.time < b.time;
                       if (a.irq_priority != b.irq_priority)
                         return a.irq_priority > b.irq_priority;
                       return a.line < b.line;
                     });
  }

  RunResult run() {
    std::size_t next_raise = 0;
    for (Tick t = 0; t <= horizon_; ++t) {
      for (JobHandle h : sched_.shed_check(t)) on_job_final(h, t);
      fire_timers(t);
      for (std::size_t i = 0; i < monitors_.size(); ++i)
        if (monitors_[i].age(t)) sched_.set_out_of_envelope(i, false);

      // Completions, sheds and unmasks since the last dispatch are schedule
      // points too; settle the level before this tick's raises.
      if (sc_.policy.ipl_optimization) update_ipl(t);

      bool raised = false;
      while (next_raise < raises_.size() && raises_[next_raise].time == t) {
        apply_raise(raises_[next_raise++], t);
        raised = true;
      }
      if (raised) deliver(t);
      refresh_elevation();
      if (t == horizon_) {
        flush_unsettled(t);
        break;
      }

      if (sc_.policy.ipl_optimization) update_ipl(t);
      const TickResult res = sched_.execute(t);
      if (res.completed) on_job_final(*res.completed, t + 1);
    }
    return {std::move(trace_), collect_metrics()};
  }

 private:
  std::size_t task_of(LineId line) const { return line_task_.at(line); }

  void record(Tick t, RecordKind kind, LineId line, std::string detail) {
    trace_.add({t, kind, line, ts_.tasks[task_of(line)].id, std::nullopt,
                std::move(detail)});
  }

  void alarms(const std::vector<Alarm>& list) {
    for (const auto& a : list) {
      alarms_.push_back(a);
      record(a.time, RecordKind::Alarm, a.line,
             std::string("kind=") + to_string(a.kind));
    }
  }

  // Occurrences still held at the horizon were never internalized.
  void flush_unsettled(Tick t) {
    for (std::size_t i = 0; i < monitors_.size(); ++i) {
      const std::uint64_t held = monitors_[i].held(vic_);
      for (std::uint64_t k = 0; k < held; ++k)
        record(t, RecordKind::Suppress, ts_.tasks[i].line, "reason=unsettled");
    }
  }

  void refresh_elevation() {
    for (std::size_t i = 0; i < monitors_.size(); ++i)
      sched_.set_out_of_envelope(i, monitors_[i].out_of_envelope());
  }

  void fire_timers(Tick t) {
    std::vector<std::size_t> due;
    for (std::size_t i = 0; i < monitors_.size(); ++i) {
      auto timer = monitors_[i].window_timer();
      if (timer && *timer <= t) due.push_back(i);
    }
    if (due.empty()) return;
    vic_.raise_event(kTimerLine, t);
    while (auto l = vic_.poll_deliverable()) {
      if (*l != kTimerLine) {
        top_half(*l, t);
        continue;
      }
      for (auto i : due) {
        auto& m = monitors_[i];
        const LineId line = ts_.tasks[i].line;
        const bool was_masked = vic_.masked(line);
        const TimerEffect eff = m.handle_window_timer(vic_, t);
        std::string detail = std::string("outcome=") + to_string(eff.outcome) +
                             ";delta=" + std::to_string(eff.delta);
        if (was_masked && !vic_.masked(line))
          record(t, RecordKind::Unmask, line, "reason=window;" + detail);
        alarms(eff.alarms);
        if (eff.rearmed)
          record(t, RecordKind::TimerSet, line,
                 "at=" + std::to_string(*eff.rearmed) + ";" + detail);
        if (eff.left_out_of_envelope) sched_.set_out_of_envelope(i, false);
      }
    }
  }

  void apply_raise(const Raise& r, Tick t) {
    auto& m = monitors_[task_of(r.line)];
    const RaiseOutcome outcome = vic_.raise_event(r.line, t);
    record(t, RecordKind::Raise, r.line,
           std::string("outcome=") + to_string(outcome));
    const bool bh_mode = sc_.policy.mask_until_bottom_half;
    switch (outcome) {
      case RaiseOutcome::DeliveredNow:
        break;
      case RaiseOutcome::LatchedPending:
        // In bottom-half mode the extra occurrence is back-filled later.
        record(t, RecordKind::Suppress, r.line,
               bh_mode ? "reason=coalesced;held" : "reason=coalesced");
        if (!bh_mode) m.note_counter_only(1);
        break;
      case RaiseOutcome::SuppressedMasked:
        if (m.blocks_internalization()) {
          record(t, RecordKind::Suppress, r.line,
                 m.faulty() ? "reason=faulty" : "reason=window");
          m.note_counter_only(1);
        } else {
          record(t, RecordKind::Suppress, r.line, "reason=bottom_half;held");
        }
        break;
      case RaiseOutcome::SuppressedIpl:
        record(t, RecordKind::Suppress, r.line, "reason=ipl;held");
        break;
    }
  }

  void deliver(Tick t) {
    while (auto l = vic_.poll_deliverable()) {
      if (*l == kTimerLine) continue;
      top_half(*l, t);
    }
  }

  void check_top_half_bound(LineId line, Tick t) {
    const auto& task = ts_.tasks[task_of(line)];
    auto& q = deliveries_[line];
    q.push_back(t);
    while (!q.empty() && q.front() <= t - task.envelope_w) q.pop_front();
    if (q.size() > task.envelope_n)
      throw std::logic_error("top-half load on line " +
                             std::to_string(line.value) +
                             " exceeds n deliveries per window");
  }

  void top_half(LineId line, Tick t) {
    const std::size_t i = task_of(line);
    auto& m = monitors_[i];
    sched_.account_top_half(t, line);
    check_top_half_bound(line, t);

    const bool was_masked = vic_.masked(line);
    const MonitorEffect eff = m.record_internalization(vic_, t);
    record(t, RecordKind::Internalize, line, "ts=" + std::to_string(eff.stamp));
    emit_monitor_effect(line, eff, was_masked, t);
    const ReleaseEffect rel = sched_.on_internalize(i, t, eff.out_of_envelope);

    if (sc_.policy.mask_until_bottom_half) {
      const bool masked_before = vic_.masked(line);
      m.apply_bottom_half_mask(vic_, t);
      bottom_half_[rel.job].push_back(i);
      if (!masked_before)
        record(t, RecordKind::Mask, line, "reason=bottom_half");
    }
  }

  void emit_monitor_effect(LineId line, const MonitorEffect& eff,
                           bool was_masked, Tick t) {
    alarms(eff.alarms);
    if (eff.window_full) {
      if (!was_masked) record(t, RecordKind::Mask, line, "reason=window");
      record(t, RecordKind::TimerSet, line, "at=" + std::to_string(*eff.timer));
    }
  }

  void apply_deferred(std::size_t i, const DeferredInternalizations& d,
                      Tick now) {
    const LineId line = ts_.tasks[i].line;
    for (const auto& eff : d.internalized) {
      record(now, RecordKind::Internalize, line,
             "ts=" + std::to_string(eff.stamp) + ";deferred");
      // the line is unmasked while back-filling until the window fills
      emit_monitor_effect(line, eff, false, now);
      sched_.on_internalize(i, now, eff.out_of_envelope);
    }
    // Whatever did not fit before the window filled is lost.
    const std::string lost = monitors_[i].faulty() ? "reason=faulty;deferred"
                                                   : "reason=window;deferred";
    for (std::uint64_t k = 0; k < d.counter_only; ++k)
      record(now, RecordKind::Suppress, line, lost);
  }

  void on_job_final(JobHandle h, Tick t) {
    auto it = bottom_half_.find(h);
    if (it == bottom_half_.end()) return;
    for (std::size_t i : it->second) {
      const LineId line = ts_.tasks[i].line;
      const bool was_masked = vic_.masked(line);
      const DeferredInternalizations d =
          monitors_[i].release_bottom_half_mask(vic_, t);
      const bool refilled = std::any_of(
          d.internalized.begin(), d.internalized.end(),
          [](const MonitorEffect& e) { return e.window_full; });
      if (was_masked && (refilled || !vic_.masked(line)))
        record(t, RecordKind::Unmask, line,
               "reason=bottom_half;deferred=" + std::to_string(d.count()));
      apply_deferred(i, d, t);
    }
    bottom_half_.erase(it);
  }

  void update_ipl(Tick t) {
    for (int guard = 0; guard < 1 + static_cast<int>(monitors_.size()) * 64;
         ++guard) {
      SchedView view;
      if (auto cand = sched_.pick_next(t)) view.running = sched_.rank(*cand);
      for (std::size_t i = 0; i < ts_.tasks.size(); ++i)
        view.lines.push_back({ts_.tasks[i].line, ts_.tasks[i].importance,
                              sched_.next_job_rank(i)});
      const std::int64_t level = compute_ipl(view);
      if (level == vic_.ipl()) return;

      vic_.set_ipl(level);
      ++ipl_updates_;
      trace_.add({t, RecordKind::IplSet, std::nullopt, "", std::nullopt,
                  "level=" + std::to_string(level)});
      bool released = false;
      for (std::size_t i = 0; i < monitors_.size(); ++i) {
        const LineId line = ts_.tasks[i].line;
        auto d = monitors_[i].set_ipl_hold(vic_, vic_.ipl_suppressed(line), t);
        if (!d) continue;
        apply_deferred(i, *d, t);
        released = released || d->count() > 0;
      }
      refresh_elevation();
      if (!released) return;
    }
    throw std::logic_error("interrupt priority level did not settle");
  }

  Metrics collect_metrics() const {
    Metrics m;
    m.horizon = horizon_;
    for (const auto& t : ts_.tasks) m.tasks[t.id];
    std::map<std::string, Tick> response_sum;
    for (const auto& j : sched_.jobs()) {
      const auto& id = ts_.tasks[j.task].id;
      auto& tm = m.tasks[id];
      ++tm.released;
      tm.notifications += j.notifications;
      switch (j.state) {
        case JobState::Completed: {
          ++tm.completed;
          const Tick r = *j.finished - j.release;
          tm.max_response = std::max(tm.max_response, r);
          response_sum[id] += r;
          break;
        }
        case JobState::Missed: ++tm.misses; break;
        case JobState::Dropped: ++tm.drops; break;
        default: ++tm.unfinished; break;
      }
    }
    for (auto& [id, tm] : m.tasks)
      if (tm.completed)
        tm.avg_response = static_cast<double>(response_sum[id]) /
                          static_cast<double>(tm.completed);

    for (std::size_t i = 0; i < ts_.tasks.size(); ++i) {
      const LineId line = ts_.tasks[i].line;
      auto& lm = m.lines[line.value];
      lm.raised = vic_.read_counter(line);
      lm.internalized = monitors_[i].internalized();
      lm.suppressed = monitors_[i].counter_only();
      lm.held = monitors_[i].held(vic_);
      lm.final_state = monitors_[i].classify();
      auto it = sched_.top_half_by_line().find(line);
      lm.top_half = it == sched_.top_half_by_line().end() ? 0 : it->second;
    }
    m.alarms = alarms_;
    m.total_top_half = sched_.top_half_total();
    m.mask_updates = vic_.mask_updates();
    m.ipl_updates = ipl_updates_;
    return m;
  }

  const Scenario& sc_;
  const TaskSet& ts_;
  Tick horizon_;
  Trace trace_;
  Vic vic_;
  std::vector<LineMonitor> monitors_;
  Scheduler sched_;
  std::map<LineId, std::size_t> line_task_;
  std::vector<Raise> raises_;
  std::map<JobHandle, std::vector<std::size_t>> bottom_half_;
  std::map<LineId, std::deque<Tick>> deliveries_;
  std::vector<Alarm> alarms_;
  std::uint64_t ipl_updates_ = 0;
};

}  // namespace

RunResult run_scenario(const Scenario& sc) {
  if (auto diag = validate_scenario(sc); !diag.empty())
    throw ScenarioError(std::move(diag));
  return Simulation(sc).run();
}

}  // namespace ooe
