#include "ooe/scheduler.hpp"

#include <algorithm>
#include <numeric>

namespace ooe {

Scheduler::Scheduler(const TaskSet& ts, PriorityMap priorities, Tick delta_th,
                     Trace* trace)
    : ts_(ts),
      priorities_(std::move(priorities)),
      delta_th_(delta_th),
      trace_(trace),
      released_(ts.tasks.size(), 0),
      ooe_(ts.tasks.size(), false),
      id_order_(ts.tasks.size(), 0) {
  if (priorities_.size() != ts.tasks.size())
    throw std::invalid_argument("priority map does not match the task set");
  std::vector<std::size_t> order(ts.tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return ts.tasks[a].id < ts.tasks[b].id; });
  for (std::size_t r = 0; r < order.size(); ++r)
    id_order_[order[r]] = -static_cast<std::int64_t>(r);
}

std::string Scheduler::label(JobHandle h) const {
  const auto& j = jobs_[h];
  return ts_.tasks[j.task].id + "#" + std::to_string(j.seq + 1);
}

void Scheduler::emit(Tick t, RecordKind kind, JobHandle h, std::string detail) {
  if (!trace_) return;
  const auto& j = jobs_[h];
  trace_->add({t, kind, ts_.tasks[j.task].line, ts_.tasks[j.task].id,
               j.seq + 1, std::move(detail)});
}

ReleaseEffect Scheduler::on_internalize(std::size_t task, Tick t, bool ooe) {
  const auto& spec = ts_.tasks.at(task);
  if (ooe) ooe_[task] = true;

  if (spec.response == ResponseOption::NotifyRunning) {
    std::optional<JobHandle> target;
    for (auto h : live_)
      if (jobs_[h].task == task && (!target || jobs_[h].seq > jobs_[*target].seq))
        target = h;
    if (target) {
      auto& j = jobs_[*target];
      ++j.notifications;
      j.out_of_envelope = j.out_of_envelope || ooe;
      emit(t, RecordKind::Notify, *target, ooe ? "ooe" : "");
      return {ReleaseEffect::Kind::Notified, *target};
    }
  }

  Job j;
  j.task = task;
  j.seq = released_[task]++;
  j.release = t;
  j.abs_deadline = t + spec.deadline;
  j.remaining = spec.wcet;
  j.out_of_envelope = ooe;
  jobs_.push_back(j);
  ran_before_.push_back(false);
  const JobHandle h = jobs_.size() - 1;
  live_.push_back(h);
  std::string detail = "deadline=" + std::to_string(j.abs_deadline);
  if (ooe) detail += ";ooe";
  emit(t, RecordKind::Release, h, detail);
  return {ReleaseEffect::Kind::Released, h};
}

void Scheduler::set_out_of_envelope(std::size_t task, bool ooe) {
  ooe_.at(task) = ooe;
}

bool Scheduler::elevated(std::size_t task) const {
  if (ooe_.at(task)) return true;
  return std::any_of(live_.begin(), live_.end(), [&](JobHandle h) {
    return jobs_[h].task == task && jobs_[h].out_of_envelope;
  });
}

JobRank Scheduler::rank_for(std::size_t task, std::uint32_t seq) const {
  JobRank r;
  r.id_order = id_order_[task];
  r.seq_order = -static_cast<std::int64_t>(seq);
  if (elevated(task)) {
    r.band = 1;
    r.band_importance = ts_.tasks[task].importance;
  } else {
    r.priority = priorities_.priority_of(task, seq);
  }
  return r;
}

JobRank Scheduler::rank(JobHandle job) const {
  return rank_for(jobs_.at(job).task, jobs_.at(job).seq);
}

JobRank Scheduler::next_job_rank(std::size_t task) const {
  return rank_for(task, released_.at(task));
}

std::optional<JobHandle> Scheduler::pick_next(Tick /*t*/) const {
  std::optional<JobHandle> best;
  JobRank best_rank;
  for (auto h : live_) {
    const JobRank r = rank(h);
    if (!best || r > best_rank) {
      best = h;
      best_rank = r;
    }
  }
  return best;
}

void Scheduler::finalize(JobHandle h, JobState state, Tick t) {
  auto& j = jobs_[h];
  j.state = state;
  j.finished = t;
  live_.erase(std::remove(live_.begin(), live_.end(), h), live_.end());
  if (last_executed_ == h) last_executed_.reset();
  if (current_ == h) current_.reset();
}

std::vector<JobHandle> Scheduler::shed_check(Tick t) {
  std::vector<JobHandle> out;
  for (auto h : std::vector<JobHandle>(live_)) {
    const auto& j = jobs_[h];
    if (j.abs_deadline > t || j.remaining == 0) continue;
    const bool dropped = j.displaced_by_elevated;
    emit(t, dropped ? RecordKind::Drop : RecordKind::Miss, h,
         "remaining=" + std::to_string(j.remaining));
    finalize(h, dropped ? JobState::Dropped : JobState::Missed, t);
    out.push_back(h);
  }
  return out;
}

void Scheduler::account_top_half(Tick /*t*/, LineId line) {
  if (delta_th_ <= 0) return;
  backlog_ += delta_th_;
  top_half_total_ += delta_th_;
  top_half_by_line_[line] += delta_th_;
  if (current_ && !is_final(jobs_[*current_].state))
    jobs_[*current_].interference += delta_th_;
}

TickResult Scheduler::execute(Tick t) {
  TickResult res;
  current_ = pick_next(t);
  std::optional<JobHandle> running = current_;
  if (backlog_ > 0) {
    --backlog_;
    res.kernel = true;
    running.reset();
  }

  if (last_executed_ != running) {
    if (last_executed_ && !is_final(jobs_[*last_executed_].state)) {
      std::string by = res.kernel ? "by=top_half"
                       : running  ? "by=" + label(*running)
                                  : "by=idle";
      jobs_[*last_executed_].state = JobState::Preempted;
      emit(t, RecordKind::Preempt, *last_executed_, by);
    }
    if (running) {
      emit(t, RecordKind::Start, *running,
           ran_before_[*running] ? "resume" : "");
    }
  }
  last_executed_ = running;
  if (!running) return res;

  const JobHandle h = *running;
  auto& j = jobs_[h];
  j.state = JobState::Running;
  ran_before_[h] = true;
  res.executed = h;

  if (elevated(j.task)) {
    const Importance imp = ts_.tasks[j.task].importance;
    for (auto other : live_) {
      auto& o = jobs_[other];
      if (other != h && o.release <= t && ts_.tasks[o.task].importance < imp)
        o.displaced_by_elevated = true;
    }
  }

  --j.remaining;
  if (j.remaining == 0) {
    const Tick done = t + 1;
    emit(done, RecordKind::Complete, h,
         "response=" + std::to_string(done - j.release));
    finalize(h, JobState::Completed, done);
    res.completed = h;
  }
  return res;
}

}  // namespace ooe
