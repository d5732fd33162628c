#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ooe/model.hpp"
#include "ooe/trace.hpp"

namespace ooe {

using JobHandle = std::size_t;

struct ReleaseEffect {
  enum class Kind { Released, Notified } kind = Kind::Released;
  JobHandle job = 0;
};

struct TickResult {
  std::optional<JobHandle> executed;
  bool kernel = false;
  std::optional<JobHandle> completed;
};

/// Preemptive fixed-priority uniprocessor scheduler with job-level priority
/// overrides and an elevation band for out-of-envelope tasks.
///
/// Jobs of elevated tasks run first, most important first; all other jobs run
/// by scheduler priority. A task stays elevated while its line is out of
/// envelope or while a job released out of envelope is still live.
///
/// Top halves are modeled as a kernel backlog of delta_th ticks per delivered
/// interrupt that runs ahead of any job.
class Scheduler {
 public:
  Scheduler(const TaskSet& ts, PriorityMap priorities, Tick delta_th,
            Trace* trace = nullptr);

  ReleaseEffect on_internalize(std::size_t task, Tick t, bool ooe);

  std::optional<JobHandle> pick_next(Tick t) const;

  /// Finalizes overdue jobs: Dropped when a more important elevated task ran
  /// while the job waited, Missed otherwise.
  std::vector<JobHandle> shed_check(Tick t);

  void account_top_half(Tick t, LineId line);

  /// Runs the tick [t, t+1): kernel backlog first, otherwise the best job.
  TickResult execute(Tick t);

  void set_out_of_envelope(std::size_t task, bool ooe);
  bool elevated(std::size_t task) const;

  JobRank rank(JobHandle job) const;
  /// Rank the task's next job would get if it were released now.
  JobRank next_job_rank(std::size_t task) const;
  std::optional<JobHandle> current() const { return current_; }

  const std::vector<Job>& jobs() const { return jobs_; }
  const Job& job(JobHandle h) const { return jobs_.at(h); }
  std::vector<JobHandle> live_jobs() const { return live_; }
  std::uint32_t released_count(std::size_t task) const {
    return released_.at(task);
  }

  Tick kernel_backlog() const { return backlog_; }
  Tick top_half_total() const { return top_half_total_; }
  const std::map<LineId, Tick>& top_half_by_line() const {
    return top_half_by_line_;
  }

 private:
  JobRank rank_for(std::size_t task, std::uint32_t seq) const;
  void emit(Tick t, RecordKind kind, JobHandle h, std::string detail = {});
  void finalize(JobHandle h, JobState state, Tick t);
  std::string label(JobHandle h) const;

  const TaskSet& ts_;
  PriorityMap priorities_;
  Tick delta_th_;
  Trace* trace_;

  std::vector<Job> jobs_;
  std::vector<JobHandle> live_;
  std::vector<std::uint32_t> released_;
  std::vector<bool> ooe_;
  std::vector<std::int64_t> id_order_;
  std::vector<bool> ran_before_;

  std::optional<JobHandle> current_;        // chosen at the last execute()
  std::optional<JobHandle> last_executed_;  // ran during the previous tick
  Tick backlog_ = 0;
  Tick top_half_total_ = 0;
  std::map<LineId, Tick> top_half_by_line_;
};

}  // namespace ooe
