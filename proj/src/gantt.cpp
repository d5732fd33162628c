#include "ooe/gantt.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace ooe {

namespace {

int kind_order(const std::string& k) {
  static const std::vector<std::string> order = {
      "run", "release", "deadline", "miss", "drop", "mask", "alarm"};
  return static_cast<int>(std::find(order.begin(), order.end(), k) - order.begin());
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<GanttRow> gantt_rows(const Trace& trace) {
  std::vector<GanttRow> rows;
  std::map<std::pair<std::string, std::uint32_t>, Tick> running;
  std::map<std::string, Tick> masked;
  Tick last = 0;

  auto close_run = [&](const TraceRecord& r) {
    auto it = running.find({r.task, r.job.value_or(0)});
    if (it == running.end()) return;
    if (r.time > it->second) rows.push_back({r.task, it->second, r.time, "run"});
    running.erase(it);
  };

  for (const auto& r : trace.records()) {
    last = std::max(last, r.time);
    switch (r.kind) {
      case RecordKind::Start:
        running[{r.task, r.job.value_or(0)}] = r.time;
        break;
      case RecordKind::Preempt:
      case RecordKind::Complete:
        close_run(r);
        break;
      case RecordKind::Miss:
      case RecordKind::Drop:
        close_run(r);
        rows.push_back({r.task, r.time, r.time,
                        r.kind == RecordKind::Miss ? "miss" : "drop"});
        break;
      case RecordKind::Release:
        rows.push_back({r.task, r.time, r.time, "release"});
        if (auto d = detail_value(r, "deadline")) {
          const Tick dl = std::stoll(*d);
          rows.push_back({r.task, dl, dl, "deadline"});
        }
        break;
      case RecordKind::Mask:
        if (!masked.contains(r.task)) masked[r.task] = r.time;
        break;
      case RecordKind::Unmask:
        if (auto it = masked.find(r.task); it != masked.end()) {
          rows.push_back({r.task, it->second, r.time, "mask"});
          masked.erase(it);
        }
        break;
      case RecordKind::Alarm:
        rows.push_back({r.task, r.time, r.time, "alarm"});
        break;
      default:
        break;
    }
  }
  for (const auto& [task, since] : masked) rows.push_back({task, since, last, "mask"});
  for (const auto& [key, since] : running)
    if (last > since) rows.push_back({key.first, since, last, "run"});

  std::stable_sort(rows.begin(), rows.end(), [](const GanttRow& a, const GanttRow& b) {
    return std::make_tuple(a.start, a.task, kind_order(a.kind), a.end) <
           std::make_tuple(b.start, b.task, kind_order(b.kind), b.end);
  });
  return rows;
}

std::string gantt_csv(const std::vector<GanttRow>& rows) {
  if (rows.empty()) return {};
  std::ostringstream out;
  out << "task,start,end,kind\n";
  for (const auto& r : rows)
    out << r.task << ',' << r.start << ',' << r.end << ',' << r.kind << '\n';
  return out.str();
}

std::string gantt_svg(const std::vector<GanttRow>& rows) {
  if (rows.empty()) return {};
  constexpr int kTick = 24;
  constexpr int kRow = 40;
  constexpr int kLeft = 90;
  constexpr int kTop = 20;

  std::vector<std::string> tasks;
  Tick end = 0;
  for (const auto& r : rows) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end())
      tasks.push_back(r.task);
    end = std::max(end, r.end);
  }
  std::sort(tasks.begin(), tasks.end());
  auto row_of = [&](const std::string& t) {
    return static_cast<int>(std::find(tasks.begin(), tasks.end(), t) - tasks.begin());
  };
  auto x = [&](Tick t) { return kLeft + static_cast<long long>(t) * kTick; };

  const long long width = x(end) + 40;
  const long long height = kTop + static_cast<long long>(tasks.size()) * kRow + 30;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const long long axis_y = kTop + static_cast<long long>(tasks.size()) * kRow;
  s << "<line x1=\"" << kLeft << "\" y1=\"" << axis_y << "\" x2=\"" << x(end)
    << "\" y2=\"" << axis_y << "\" stroke=\"black\"/>\n";
  for (Tick t = 0; t <= end; ++t)
    s << "<text x=\"" << x(t) - 3 << "\" y=\"" << axis_y + 14 << "\">" << t
      << "</text>\n";

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const long long base = kTop + static_cast<long long>(i) * kRow;
    s << "<text x=\"4\" y=\"" << base + kRow / 2 + 4 << "\">" << escape(tasks[i])
      << "</text>\n";
    s << "<line x1=\"" << kLeft << "\" y1=\"" << base + kRow - 6 << "\" x2=\""
      << x(end) << "\" y2=\"" << base + kRow - 6
      << "\" stroke=\"#ccc\"/>\n";
  }

  // Masks first so execution boxes draw on top.
  for (const auto& r : rows) {
    const long long base = kTop + static_cast<long long>(row_of(r.task)) * kRow;
    const long long bar_top = base + 12;
    const long long bar_h = kRow - 18;
    if (r.kind == "mask") {
      s << "<rect x=\"" << x(r.start) << "\" y=\"" << base + 4 << "\" width=\""
        << std::max<long long>(x(r.end) - x(r.start), 2) << "\" height=\""
        << kRow - 10 << "\" fill=\"#f5c26b\" fill-opacity=\"0.4\"/>\n";
    } else if (r.kind == "run") {
      s << "<rect x=\"" << x(r.start) << "\" y=\"" << bar_top << "\" width=\""
        << x(r.end) - x(r.start) << "\" height=\"" << bar_h
        << "\" fill=\"#4a7ebb\" stroke=\"black\"/>\n";
    }
  }
  for (const auto& r : rows) {
    const long long base = kTop + static_cast<long long>(row_of(r.task)) * kRow;
    const long long px = x(r.start);
    const long long bottom = base + kRow - 6;
    if (r.kind == "release") {
      s << "<line x1=\"" << px << "\" y1=\"" << bottom << "\" x2=\"" << px
        << "\" y2=\"" << base + 2 << "\" stroke=\"green\" stroke-width=\"2\"/>\n";
    } else if (r.kind == "deadline") {
      s << "<line x1=\"" << px << "\" y1=\"" << base + 2 << "\" x2=\"" << px
        << "\" y2=\"" << bottom << "\" stroke=\"gray\" stroke-dasharray=\"3,2\"/>\n";
    } else if (r.kind == "miss" || r.kind == "drop") {
      const char* color = r.kind == "miss" ? "red" : "darkorange";
      s << "<path d=\"M" << px - 5 << ' ' << base + 6 << " L" << px + 5 << ' '
        << base + 16 << " M" << px + 5 << ' ' << base + 6 << " L" << px - 5
        << ' ' << base + 16 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"><title>" << r.kind << "</title></path>\n";
    } else if (r.kind == "alarm") {
      s << "<circle cx=\"" << px << "\" cy=\"" << base + 6
        << "\" r=\"4\" fill=\"crimson\"><title>alarm</title></circle>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace ooe
