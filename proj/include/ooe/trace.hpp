#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ooe/model.hpp"

namespace ooe {

enum class RecordKind {
  Raise,
  Internalize,
  Suppress,
  Mask,
  Unmask,
  IplSet,
  TimerSet,
  Release,
  Notify,
  Start,
  Preempt,
  Complete,
  Miss,
  Drop,
  Alarm,
};

const char* to_string(RecordKind k);
std::optional<RecordKind> parse_record_kind(std::string_view s);

struct TraceRecord {
  Tick time = 0;
  RecordKind kind = RecordKind::Raise;
  std::optional<LineId> line;
  std::string task;
  std::optional<std::uint32_t> job;  // 1-based job number
  std::string detail;                // ';'-separated key=value items

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Value of `key` in a record's detail ("a=1;b=x" -> detail_value(r,"b")=="x").
std::optional<std::string> detail_value(const TraceRecord& r,
                                        std::string_view key);
bool detail_has(const TraceRecord& r, std::string_view flag);

class Trace {
 public:
  void add(TraceRecord r);
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::size_t count(RecordKind kind) const;

 private:
  std::vector<TraceRecord> records_;
};

inline constexpr std::string_view kTraceHeader = "time,kind,line,task,job,detail";

void write_trace_csv(const Trace& trace, std::ostream& out);
std::string trace_to_csv(const Trace& trace);

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the CSV written by write_trace_csv. Throws TraceParseError with the
/// offending line number.
Trace read_trace_csv(std::istream& in);

}  // namespace ooe
