#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

#include "ooe/model.hpp"

namespace ooe {

// Priority of the timer line; above every device line and every IPL.
inline constexpr std::int64_t kTimerPriority =
    std::numeric_limits<std::int64_t>::max();

struct InterruptLine {
  LineId id;
  std::int64_t irq_priority = 0;
  bool masked = false;
  std::uint64_t device_counter = 0;
  bool pending = false;
};

enum class RaiseOutcome {
  DeliveredNow,     // line is deliverable; pending latch set
  LatchedPending,   // folded into an already set pending latch
  SuppressedMasked,
  SuppressedIpl,
};

const char* to_string(RaiseOutcome o);

struct CounterSnapshot {
  LineId line;
  std::uint64_t counter = 0;
  Tick time = 0;
};

class VicError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vectored interrupt controller with per-line masks, an interrupt priority
/// level and a device-side occurrence counter per line.
///
/// A line is deliverable iff it is unmasked, its priority exceeds the IPL and
/// it is pending. The timer line is created on construction and cannot be
/// masked; its priority exceeds any IPL.
class Vic {
 public:
  Vic();

  void add_line(LineId id, std::int64_t irq_priority);

  /// Counts the occurrence and classifies it. Masked and IPL-suppressed
  /// occurrences leave the pending latch untouched; callers reconstruct them
  /// from the counter.
  RaiseOutcome raise_event(LineId line, Tick t);

  void set_line_mask(LineId line, bool masked);
  void set_ipl(std::int64_t level);
  std::int64_t ipl() const { return ipl_; }

  /// Highest-priority deliverable pending line (timer first); clears its latch.
  std::optional<LineId> poll_deliverable();

  std::uint64_t read_counter(LineId line) const;
  CounterSnapshot snapshot_counter(LineId line, Tick t) const;
  std::uint64_t delta_since(const CounterSnapshot& snap) const;

  bool masked(LineId line) const { return get(line).masked; }
  bool ipl_suppressed(LineId line) const;
  bool has_line(LineId line) const { return lines_.contains(line); }

  // Number of mask-bit changes, for hardware cost studies.
  std::uint64_t mask_updates() const { return mask_updates_; }

  const std::map<LineId, InterruptLine>& lines() const { return lines_; }

 private:
  const InterruptLine& get(LineId line) const;
  InterruptLine& get(LineId line);

  std::map<LineId, InterruptLine> lines_;
  std::int64_t ipl_ = 0;
  std::uint64_t mask_updates_ = 0;
};

}  // namespace ooe
