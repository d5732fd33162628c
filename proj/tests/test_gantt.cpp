#include "doctest.h"

#include <sstream>

#include "ooe/gantt.hpp"
#include "support.hpp"

using namespace ooe;
using namespace ooe::test;

namespace {

std::vector<GanttRow> only(const std::vector<GanttRow>& rows, const std::string& kind) {
  std::vector<GanttRow> out;
  for (const auto& r : rows)
    if (r.kind == kind) out.push_back(r);
  return out;
}

}  // namespace

TEST_CASE("two-task override: execution intervals") {
  const auto rows = gantt_rows(run_scenario(two_task(TwoTask::Override)).trace);
  CHECK(only(rows, "run") == std::vector<GanttRow>{{"tau_l", 0, 2, "run"},
                                                   {"tau_h", 2, 4, "run"},
                                                   {"tau_l", 4, 6, "run"}});
  CHECK(only(rows, "miss").empty());
  CHECK(only(rows, "drop").empty());
}

TEST_CASE("two-task burst drops tau_l at 6") {
  const auto rows = gantt_rows(run_scenario(two_task(TwoTask::OverrideOutOfEnvelope)).trace);
  CHECK(only(rows, "drop") == std::vector<GanttRow>{{"tau_l", 6, 6, "drop"}});
  CHECK(only(rows, "run") == std::vector<GanttRow>{{"tau_l", 0, 2, "run"},
                                                   {"tau_h", 2, 4, "run"},
                                                   {"tau_h", 4, 6, "run"}});
}

TEST_CASE("two-task importance order shows the miss") {
  const auto rows = gantt_rows(run_scenario(two_task(TwoTask::ImportanceMonotonic)).trace);
  const auto misses = only(rows, "miss");
  REQUIRE_FALSE(misses.empty());
  CHECK(misses.front() == GanttRow{"tau_l", 3, 3, "miss"});
}

TEST_CASE("empty trace gives empty output") {
  const auto rows = gantt_rows(Trace{});
  CHECK(rows.empty());
  CHECK(gantt_csv(rows).empty());
  CHECK(gantt_svg(rows).empty());
}

TEST_CASE("preempted job splits into two runs and an open mask ends at the trace end") {
  Trace tr;
  tr.add({0, RecordKind::Start, LineId{1}, "lo", 1, ""});
  tr.add({1, RecordKind::Mask, LineId{1}, "lo", std::nullopt, "reason=window"});
  tr.add({1, RecordKind::Preempt, LineId{1}, "lo", 1, "by=hi#1"});
  tr.add({1, RecordKind::Start, LineId{2}, "hi", 1, ""});
  tr.add({2, RecordKind::Complete, LineId{2}, "hi", 1, "response=1"});
  tr.add({2, RecordKind::Start, LineId{1}, "lo", 1, "resume"});
  tr.add({5, RecordKind::Complete, LineId{1}, "lo", 1, "response=5"});
  const auto rows = gantt_rows(tr);
  CHECK(rows == std::vector<GanttRow>{{"lo", 0, 1, "run"},
                                      {"hi", 1, 2, "run"},
                                      {"lo", 1, 5, "mask"},
                                      {"lo", 2, 5, "run"}});
  CHECK(gantt_csv(rows) == "task,start,end,kind\nlo,0,1,run\nhi,1,2,run\nlo,1,5,mask\nlo,2,5,run\n");
}

TEST_CASE("svg is well formed enough") {
  const auto svg = gantt_svg(gantt_rows(run_scenario(two_task(TwoTask::OverrideOutOfEnvelope)).trace));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find(">tau_h<") != std::string::npos);
  CHECK(svg.find(">tau_l<") != std::string::npos);
}

TEST_CASE("trace CSV round trip feeds the same chart") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto tr = run_scenario(random_scenario(seed)).trace;
    std::istringstream in(trace_to_csv(tr));
    const auto back = read_trace_csv(in);
    CHECK(back.records() == tr.records());
    CHECK(gantt_rows(back) == gantt_rows(tr));
  }
  std::istringstream bad("time,kind,line,task,job,detail\n0,EXPLODE,1,a,,\n");
  CHECK_THROWS_AS(read_trace_csv(bad), TraceParseError);
}
