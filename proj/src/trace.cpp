#include "ooe/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ooe {

namespace {

constexpr std::array<std::pair<RecordKind, std::string_view>, 15> kKindNames{{
    {RecordKind::Raise, "RAISE"},
    {RecordKind::Internalize, "INTERNALIZE"},
    {RecordKind::Suppress, "SUPPRESS"},
    {RecordKind::Mask, "MASK"},
    {RecordKind::Unmask, "UNMASK"},
    {RecordKind::IplSet, "IPL_SET"},
    {RecordKind::TimerSet, "TIMER_SET"},
    {RecordKind::Release, "RELEASE"},
    {RecordKind::Notify, "NOTIFY"},
    {RecordKind::Start, "START"},
    {RecordKind::Preempt, "PREEMPT"},
    {RecordKind::Complete, "COMPLETE"},
    {RecordKind::Miss, "MISS"},
    {RecordKind::Drop, "DROP"},
    {RecordKind::Alarm, "ALARM"},
}};

template <typename T>
std::optional<T> parse_int(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

const char* to_string(RecordKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name.data();
  return "?";
}

std::optional<RecordKind> parse_record_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::optional<std::string> detail_value(const TraceRecord& r,
                                        std::string_view key) {
  for (auto item : split(r.detail, ';')) {
    auto eq = item.find('=');
    if (eq != std::string_view::npos && item.substr(0, eq) == key)
      return std::string(item.substr(eq + 1));
  }
  return std::nullopt;
}

bool detail_has(const TraceRecord& r, std::string_view flag) {
  for (auto item : split(r.detail, ';'))
    if (item == flag) return true;
  return false;
}

void Trace::add(TraceRecord r) {
  if (!records_.empty() && r.time < records_.back().time)
    throw std::logic_error("trace records must be appended in time order");
  if (r.detail.find(',') != std::string::npos ||
      r.task.find(',') != std::string::npos)
    throw std::logic_error("trace fields must not contain commas");
  records_.push_back(std::move(r));
}

std::size_t Trace::count(RecordKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [&](const TraceRecord& r) { return r.kind == kind; }));
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records()) {
    out << r.time << ',' << to_string(r.kind) << ',';
    if (r.line) out << r.line->value;
    out << ',' << r.task << ',';
    if (r.job) out << *r.job;
    out << ',' << r.detail << '\n';
  }
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  return os.str();
}

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTraceHeader)
        throw TraceParseError("line 1: expected header '" +
                              std::string(kTraceHeader) + "'");
      header_seen = true;
      continue;
    }
    auto fail = [&](const std::string& what) {
      return TraceParseError("line " + std::to_string(lineno) + ": " + what);
    };
    auto fields = split(line, ',');
    if (fields.size() != 6) throw fail("expected 6 fields");
    TraceRecord r;
    auto t = parse_int<Tick>(fields[0]);
    if (!t) throw fail("bad time");
    r.time = *t;
    auto kind = parse_record_kind(fields[1]);
    if (!kind) throw fail("unknown kind '" + std::string(fields[1]) + "'");
    r.kind = *kind;
    if (!fields[2].empty()) {
      auto l = parse_int<std::uint32_t>(fields[2]);
      if (!l) throw fail("bad line");
      r.line = LineId{*l};
    }
    r.task = std::string(fields[3]);
    if (!fields[4].empty()) {
      auto j = parse_int<std::uint32_t>(fields[4]);
      if (!j) throw fail("bad job");
      r.job = *j;
    }
    r.detail = std::string(fields[5]);
    try {
      trace.add(std::move(r));
    } catch (const std::logic_error& e) {
      throw fail(e.what());
    }
  }
  return trace;
}

}  // namespace ooe
