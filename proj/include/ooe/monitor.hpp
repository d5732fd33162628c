#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/circular_buffer.hpp>

#include "ooe/model.hpp"
#include "ooe/vic.hpp"

namespace ooe {

enum class LineState { InEnvelope, OutOfEnvelope, WindowMasked, Faulty };
enum class AlarmKind {
  OutOfEnvelopeEntered,
  WindowBoundReached,
  SensorFault,
  SensorResumed,
};
enum class FaultPolicy { Permanent, AutoResume };

const char* to_string(LineState s);
const char* to_string(AlarmKind k);

struct Alarm {
  Tick time = 0;
  LineId line;
  AlarmKind kind = AlarmKind::OutOfEnvelopeEntered;

  friend bool operator==(const Alarm&, const Alarm&) = default;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct MonitorEffect {
  Tick stamp = 0;
  bool entered_out_of_envelope = false;
  bool left_out_of_envelope = false;
  bool out_of_envelope = false;  // episode state after this internalization
  bool window_full = false;
  std::optional<Tick> timer;
  std::vector<Alarm> alarms;
};

enum class TimerOutcome { Unmasked, FaultDeclared, Resumed, StillFaulty };

const char* to_string(TimerOutcome o);

struct TimerEffect {
  TimerOutcome outcome = TimerOutcome::Unmasked;
  std::uint64_t delta = 0;
  bool left_out_of_envelope = false;
  std::optional<Tick> rearmed;
  std::vector<Alarm> alarms;
};

// Occurrences reconstructed from the device counter when a bottom-half mask
// or an IPL hold is lifted.
struct DeferredInternalizations {
  Tick assigned_timestamp = 0;
  std::vector<MonitorEffect> internalized;
  std::uint64_t counter_only = 0;

  std::size_t count() const { return internalized.size(); }
};

struct MonitorConfig {
  LineId line;
  Tick period = 1;  // kInfinite for exception-only tasks
  Tick window = 1;
  std::uint32_t capacity = 1;
  FaultPolicy fault_policy = FaultPolicy::Permanent;
};

/// Out-of-envelope detector and defense for one interrupt line.
///
/// Internalization timestamps go into a ring of capacity n. When the ring
/// holds n stamps inside one window the line is masked and a timer is armed at
/// earliest + W. At expiry, any occurrence counted by the device while masked
/// marks the sensor faulty.
///
/// Every device occurrence is eventually accounted as internalized or
/// counter-only; until then it is held (bottom-half mask or IPL hold) and
/// back-filled when the hold ends.
class LineMonitor {
 public:
  explicit LineMonitor(const MonitorConfig& cfg);

  MonitorEffect record_internalization(Vic& vic, Tick now);

  TimerEffect handle_window_timer(Vic& vic, Tick t);

  void apply_bottom_half_mask(Vic& vic, Tick t);
  DeferredInternalizations release_bottom_half_mask(Vic& vic, Tick t_unmask);

  /// Starts or ends an IPL hold. Ending it back-fills deferred occurrences.
  std::optional<DeferredInternalizations> set_ipl_hold(Vic& vic, bool held,
                                                       Tick t);

  /// Occurrences that will never be internalized.
  void note_counter_only(std::uint64_t count);

  /// Ends an out-of-envelope episode once no close pair is left in the last
  /// max(T, W) ticks. Returns true when the episode ended.
  bool age(Tick t);

  LineState classify() const;
  bool out_of_envelope() const { return ooe_; }
  bool window_masked() const { return window_masked_; }
  bool faulty() const { return faulty_; }
  bool bottom_half_masked() const { return bh_masked_; }
  bool ipl_held() const { return ipl_held_; }
  bool blocks_internalization() const { return window_masked_ || faulty_; }

  std::optional<Tick> window_timer() const { return window_timer_; }
  std::optional<Tick> last_internalization() const { return last_stamp_; }
  std::vector<Tick> ring() const { return {ring_.begin(), ring_.end()}; }

  std::uint64_t internalized() const { return internalized_; }
  std::uint64_t counter_only() const { return counter_only_; }
  std::uint64_t held(const Vic& vic) const;

  const MonitorConfig& config() const { return cfg_; }

 private:
  MonitorEffect internalize(Vic& vic, Tick now, Tick stamp);
  void prune(Tick reference);
  void sync_mask(Vic& vic) const;
  DeferredInternalizations settle(Vic& vic, Tick now);
  bool recent_gap_in_envelope() const;

  MonitorConfig cfg_;
  boost::circular_buffer<Tick> ring_;

  bool ooe_ = false;
  bool window_masked_ = false;
  bool faulty_ = false;
  bool bh_masked_ = false;
  bool ipl_held_ = false;

  std::optional<Tick> hold_since_;
  std::optional<CounterSnapshot> mask_snapshot_;
  std::optional<Tick> window_timer_;
  std::optional<Tick> last_stamp_;
  std::optional<Tick> last_gap_;
  std::optional<Tick> last_close_pair_;
  std::optional<Tick> last_prune_;

  std::uint64_t accounted_ = 0;
  std::uint64_t internalized_ = 0;
  std::uint64_t counter_only_ = 0;
};

/// What the IPL computation needs to know about the scheduler.
struct SchedView {
  struct Line {
    LineId line;
    Importance importance = 0;
    JobRank next_job;
  };
  std::optional<JobRank> running;
  std::vector<Line> lines;
};

/// Interrupt priority level that keeps only lines whose next job could
/// preempt the running one (plus any more important line; the scheme is not
/// exact). Idle CPU gives 0; nothing preempting gives the maximum importance.
std::int64_t compute_ipl(const SchedView& view);

}  // namespace ooe
