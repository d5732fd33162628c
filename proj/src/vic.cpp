#include "ooe/vic.hpp"

#include <string>

namespace ooe {

const char* to_string(RaiseOutcome o) {
  switch (o) {
    case RaiseOutcome::DeliveredNow: return "delivered";
    case RaiseOutcome::LatchedPending: return "latched";
    case RaiseOutcome::SuppressedMasked: return "masked";
    case RaiseOutcome::SuppressedIpl: return "ipl";
  }
  return "?";
}

Vic::Vic() {
  lines_.emplace(kTimerLine, InterruptLine{kTimerLine, kTimerPriority});
}

void Vic::add_line(LineId id, std::int64_t irq_priority) {
  if (id == kTimerLine) throw VicError("line id reserved for the timer");
  if (irq_priority < 0 || irq_priority == kTimerPriority)
    throw VicError("irq priority out of range");
  if (!lines_.emplace(id, InterruptLine{id, irq_priority}).second)
    throw VicError("line " + std::to_string(id.value) + " already exists");
}

const InterruptLine& Vic::get(LineId line) const {
  auto it = lines_.find(line);
  if (it == lines_.end())
    throw VicError("unknown line " + std::to_string(line.value));
  return it->second;
}

InterruptLine& Vic::get(LineId line) {
  return const_cast<InterruptLine&>(std::as_const(*this).get(line));
}

bool Vic::ipl_suppressed(LineId line) const {
  return get(line).irq_priority <= ipl_;
}

RaiseOutcome Vic::raise_event(LineId line, Tick /*t*/) {
  auto& l = get(line);
  ++l.device_counter;
  if (l.masked) return RaiseOutcome::SuppressedMasked;
  if (l.irq_priority <= ipl_) return RaiseOutcome::SuppressedIpl;
  if (l.pending) return RaiseOutcome::LatchedPending;
  l.pending = true;
  return RaiseOutcome::DeliveredNow;
}

void Vic::set_line_mask(LineId line, bool masked) {
  if (line == kTimerLine) throw VicError("the timer line cannot be masked");
  auto& l = get(line);
  if (l.masked != masked) ++mask_updates_;
  l.masked = masked;
}

void Vic::set_ipl(std::int64_t level) {
  if (level < 0) throw VicError("interrupt priority level must be >= 0");
  if (level >= kTimerPriority)
    throw VicError("interrupt priority level would suppress the timer");
  ipl_ = level;
}

std::optional<LineId> Vic::poll_deliverable() {
  InterruptLine* best = nullptr;
  for (auto& [id, l] : lines_) {
    if (!l.pending || l.masked || l.irq_priority <= ipl_) continue;
    // map order visits lower ids first, so ties keep the lower id
    if (!best || l.irq_priority > best->irq_priority) best = &l;
  }
  if (!best) return std::nullopt;
  best->pending = false;
  return best->id;
}

std::uint64_t Vic::read_counter(LineId line) const {
  return get(line).device_counter;
}

CounterSnapshot Vic::snapshot_counter(LineId line, Tick t) const {
  return {line, get(line).device_counter, t};
}

std::uint64_t Vic::delta_since(const CounterSnapshot& snap) const {
  return get(snap.line).device_counter - snap.counter;
}

}  // namespace ooe
