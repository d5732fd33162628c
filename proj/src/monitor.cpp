#include "ooe/monitor.hpp"

#include <algorithm>

namespace ooe {

const char* to_string(LineState s) {
  switch (s) {
    case LineState::InEnvelope: return "InEnvelope";
    case LineState::OutOfEnvelope: return "OutOfEnvelope";
    case LineState::WindowMasked: return "WindowMasked";
    case LineState::Faulty: return "Faulty";
  }
  return "?";
}

const char* to_string(AlarmKind k) {
  switch (k) {
    case AlarmKind::OutOfEnvelopeEntered: return "OutOfEnvelopeEntered";
    case AlarmKind::WindowBoundReached: return "WindowBoundReached";
    case AlarmKind::SensorFault: return "SensorFault";
    case AlarmKind::SensorResumed: return "SensorResumed";
  }
  return "?";
}

const char* to_string(TimerOutcome o) {
  switch (o) {
    case TimerOutcome::Unmasked: return "unmasked";
    case TimerOutcome::FaultDeclared: return "fault";
    case TimerOutcome::Resumed: return "resumed";
    case TimerOutcome::StillFaulty: return "still_faulty";
  }
  return "?";
}

LineMonitor::LineMonitor(const MonitorConfig& cfg)
    : cfg_(cfg), ring_(std::max<std::uint32_t>(cfg.capacity, 1)) {
  if (cfg.capacity < 1) throw std::invalid_argument("ring capacity must be >= 1");
  if (cfg.window < 1) throw std::invalid_argument("window must be >= 1");
}

void LineMonitor::prune(Tick reference) {
  while (!ring_.empty() && ring_.front() <= reference - cfg_.window)
    ring_.pop_front();
  last_prune_ = std::max(last_prune_.value_or(reference), reference);
}

void LineMonitor::sync_mask(Vic& vic) const {
  const bool want = window_masked_ || faulty_ || bh_masked_;
  if (vic.masked(cfg_.line) != want) vic.set_line_mask(cfg_.line, want);
}

bool LineMonitor::recent_gap_in_envelope() const {
  if (cfg_.period == kInfinite) return false;
  return last_gap_ && *last_gap_ >= cfg_.period;
}

MonitorEffect LineMonitor::record_internalization(Vic& vic, Tick now) {
  return internalize(vic, now, now);
}

MonitorEffect LineMonitor::internalize(Vic& vic, Tick now, Tick stamp) {
  if (blocks_internalization())
    throw ContractViolation("internalization on a window-masked line");

  MonitorEffect eff;
  eff.stamp = stamp;
  prune(stamp);

  bool close = cfg_.period == kInfinite;
  if (last_stamp_) {
    last_gap_ = stamp - *last_stamp_;
    close = close || *last_gap_ < cfg_.period;
  }
  ring_.push_back(stamp);
  last_stamp_ = stamp;
  ++accounted_;
  ++internalized_;

  if (close) {
    last_close_pair_ = stamp;
    if (!ooe_) {
      ooe_ = true;
      eff.entered_out_of_envelope = true;
      eff.alarms.push_back({now, cfg_.line, AlarmKind::OutOfEnvelopeEntered});
    }
  }

  if (ring_.full()) {
    window_masked_ = true;
    mask_snapshot_ = CounterSnapshot{cfg_.line, accounted_, now};
    window_timer_ = std::max(ring_.front() + cfg_.window, now);
    sync_mask(vic);
    eff.window_full = true;
    eff.timer = window_timer_;
    eff.alarms.push_back({now, cfg_.line, AlarmKind::WindowBoundReached});
  } else if (ooe_ && !close) {
    ooe_ = false;
    eff.left_out_of_envelope = true;
  }
  eff.out_of_envelope = ooe_;
  return eff;
}

TimerEffect LineMonitor::handle_window_timer(Vic& vic, Tick t) {
  if (!window_timer_ || *window_timer_ > t || !mask_snapshot_)
    throw ContractViolation("window timer fired without an armed mask");

  TimerEffect eff;
  prune(t);
  eff.delta = vic.read_counter(cfg_.line) - mask_snapshot_->counter;
  window_timer_.reset();

  auto rearm = [&] {
    window_timer_ = t + cfg_.window;
    mask_snapshot_ = vic.snapshot_counter(cfg_.line, t);
    eff.rearmed = window_timer_;
  };

  if (!faulty_) {
    if (eff.delta == 0) {
      window_masked_ = false;
      mask_snapshot_.reset();
      eff.outcome = TimerOutcome::Unmasked;
      if (ooe_ && recent_gap_in_envelope()) {
        ooe_ = false;
        eff.left_out_of_envelope = true;
      }
    } else {
      // More than n occurrences in one window.
      faulty_ = true;
      window_masked_ = false;
      eff.outcome = TimerOutcome::FaultDeclared;
      eff.alarms.push_back({t, cfg_.line, AlarmKind::SensorFault});
      if (ooe_) {
        ooe_ = false;
        eff.left_out_of_envelope = true;
      }
      if (cfg_.fault_policy == FaultPolicy::AutoResume)
        rearm();
      else
        mask_snapshot_.reset();
    }
  } else if (eff.delta < cfg_.capacity) {
    faulty_ = false;
    mask_snapshot_.reset();
    eff.outcome = TimerOutcome::Resumed;
    eff.alarms.push_back({t, cfg_.line, AlarmKind::SensorResumed});
  } else {
    eff.outcome = TimerOutcome::StillFaulty;
    rearm();
  }
  sync_mask(vic);
  return eff;
}

void LineMonitor::apply_bottom_half_mask(Vic& vic, Tick t) {
  if (bh_masked_) throw ContractViolation("bottom-half mask applied twice");
  bh_masked_ = true;
  if (!hold_since_) hold_since_ = t;
  sync_mask(vic);
}

DeferredInternalizations LineMonitor::release_bottom_half_mask(Vic& vic,
                                                               Tick t_unmask) {
  if (!bh_masked_)
    throw ContractViolation("bottom-half release without a matching mask");
  bh_masked_ = false;
  sync_mask(vic);
  if (ipl_held_) return {hold_since_.value_or(t_unmask), {}, 0};
  return settle(vic, t_unmask);
}

std::optional<DeferredInternalizations> LineMonitor::set_ipl_hold(Vic& vic,
                                                                  bool held,
                                                                  Tick t) {
  if (held == ipl_held_) return std::nullopt;
  ipl_held_ = held;
  if (held) {
    if (!hold_since_) hold_since_ = t;
    return std::nullopt;
  }
  if (bh_masked_) return std::nullopt;
  return settle(vic, t);
}

DeferredInternalizations LineMonitor::settle(Vic& vic, Tick now) {
  DeferredInternalizations out;
  const std::uint64_t pending = held(vic);
  Tick stamp = hold_since_.value_or(now);
  if (last_prune_) stamp = std::max(stamp, *last_prune_);
  if (last_stamp_) stamp = std::max(stamp, *last_stamp_);
  stamp = std::min(stamp, now);
  hold_since_.reset();
  out.assigned_timestamp = stamp;

  std::uint64_t done = 0;
  while (done < pending && !blocks_internalization()) {
    out.internalized.push_back(internalize(vic, now, stamp));
    ++done;
  }
  out.counter_only = pending - done;
  note_counter_only(out.counter_only);
  return out;
}

void LineMonitor::note_counter_only(std::uint64_t count) {
  accounted_ += count;
  counter_only_ += count;
}

bool LineMonitor::age(Tick t) {
  if (!ooe_ || window_masked_ || faulty_ || !last_close_pair_) return false;
  const Tick span = cfg_.period == kInfinite
                        ? cfg_.window
                        : std::max(cfg_.period, cfg_.window);
  if (*last_close_pair_ > t - span) return false;
  ooe_ = false;
  return true;
}

LineState LineMonitor::classify() const {
  if (faulty_) return LineState::Faulty;
  if (window_masked_) return LineState::WindowMasked;
  if (ooe_) return LineState::OutOfEnvelope;
  return LineState::InEnvelope;
}

std::uint64_t LineMonitor::held(const Vic& vic) const {
  return vic.read_counter(cfg_.line) - accounted_;
}

std::int64_t compute_ipl(const SchedView& view) {
  if (!view.running) return 0;
  std::optional<Importance> least_preempting;
  Importance most_important = 0;
  for (const auto& l : view.lines) {
    most_important = std::max(most_important, l.importance);
    if (l.next_job > *view.running) {
      least_preempting = least_preempting
                             ? std::min(*least_preempting, l.importance)
                             : l.importance;
    }
  }
  if (!least_preempting) return most_important;
  return std::max<std::int64_t>(std::int64_t{*least_preempting} - 1, 0);
}

}  // namespace ooe
