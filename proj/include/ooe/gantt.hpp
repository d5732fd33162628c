#pragma once

#include <string>
#include <vector>

#include "ooe/trace.hpp"

namespace ooe {

// kind: run, release, deadline, miss, drop, mask or alarm. Point events have
// start == end; a mask still open at the end of the trace ends there.
struct GanttRow {
  std::string task;
  Tick start = 0;
  Tick end = 0;
  std::string kind;

  friend bool operator==(const GanttRow&, const GanttRow&) = default;
};

std::vector<GanttRow> gantt_rows(const Trace& trace);

// Header plus one line per row; empty string for no rows.
std::string gantt_csv(const std::vector<GanttRow>& rows);
std::string gantt_svg(const std::vector<GanttRow>& rows);

}  // namespace ooe
