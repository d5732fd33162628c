#include "ooe/scenario_json.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ooe {

namespace {

using json = nlohmann::json;

// Collects diagnostics while walking the document so that one bad field
// does not hide the others.
class Reader {
 public:
  std::vector<std::string> diag;

  void fail(const std::string& where, const std::string& what) {
    diag.push_back(where + ": " + what);
  }

  bool object(const json& j, const std::string& where,
              std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      fail(where, "expected an object");
      return false;
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
      if (!keys.contains(k)) fail(where, "unknown key '" + k + "'");
    return true;
  }

  const json* field(const json& j, const std::string& where, const char* key,
                    bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where, std::string("missing required key '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  template <typename Int>
  std::optional<Int> integer(const json& j, const std::string& where,
                             const char* key, bool required,
                             Int min = std::numeric_limits<Int>::min()) {
    const json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    const std::string at = where + "." + key;
    if (!v->is_number_integer()) {
      fail(at, "expected an integer");
      return std::nullopt;
    }
    if (v->is_number_unsigned()) {
      const auto u = v->get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
        fail(at, "out of range");
        return std::nullopt;
      }
      if (static_cast<Int>(u) < min) {
        fail(at, "must be >= " + std::to_string(min));
        return std::nullopt;
      }
      return static_cast<Int>(u);
    }
    const auto s = v->get<std::int64_t>();
    if (s < static_cast<std::int64_t>(min) ||
        (std::is_unsigned_v<Int> && s < 0)) {
      fail(at, "must be >= " + std::to_string(min));
      return std::nullopt;
    }
    if constexpr (sizeof(Int) < sizeof(std::int64_t)) {
      if (s > static_cast<std::int64_t>(std::numeric_limits<Int>::max())) {
        fail(at, "out of range");
        return std::nullopt;
      }
    }
    return static_cast<Int>(s);
  }

  std::optional<double> number(const json& j, const std::string& where,
                               const char* key, bool required) {
    const json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(where + "." + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<bool> boolean(const json& j, const std::string& where,
                              const char* key) {
    const json* v = field(j, where, key, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(where + "." + key, "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> string(const json& j, const std::string& where,
                                    const char* key, bool required) {
    const json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(where + "." + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  template <typename E>
  std::optional<E> choice(const json& j, const std::string& where,
                          const char* key, bool required,
                          std::initializer_list<std::pair<const char*, E>> opts) {
    auto s = string(j, where, key, required);
    if (!s) return std::nullopt;
    std::string names;
    for (const auto& [name, value] : opts) {
      if (*s == name) return value;
      names += (names.empty() ? "" : ", ") + std::string(name);
    }
    fail(where + "." + key, "'" + *s + "' is not one of " + names);
    return std::nullopt;
  }
};

void read_task(Reader& r, const json& j, const std::string& where,
               TaskSet& ts) {
  if (!r.object(j, where,
                {"id", "C", "T", "D", "importance", "line", "n", "W", "response",
                 "priority", "job_priority_overrides"}))
    return;
  Task t;
  t.id = r.string(j, where, "id", true).value_or("");
  t.wcet = r.integer<Tick>(j, where, "C", true, 1).value_or(1);

  if (const json* T = r.field(j, where, "T", true)) {
    if (T->is_string() && T->get<std::string>() == "inf") {
      t.period = kInfinite;
    } else if (T->is_number_integer()) {
      t.period = r.integer<Tick>(j, where, "T", true, 1).value_or(1);
    } else {
      r.fail(where + ".T", "expected a positive integer or \"inf\"");
    }
  }
  if (auto D = r.integer<Tick>(j, where, "D", false, 1)) {
    t.deadline = *D;
  } else if (!j.contains("D")) {
    if (t.period == kInfinite)
      r.fail(where + ".D", "required when T is \"inf\"");
    t.deadline = t.period;
  }
  t.importance = r.integer<Importance>(j, where, "importance", true, 0).value_or(0);
  t.line = LineId{r.integer<std::uint32_t>(j, where, "line", true, 0).value_or(0)};
  t.envelope_n = r.integer<std::uint32_t>(j, where, "n", true, 1).value_or(1);
  t.envelope_w = r.integer<Tick>(j, where, "W", true, 1).value_or(1);
  t.response = r.choice<ResponseOption>(
                    j, where, "response", true,
                    {{"release_all", ResponseOption::ReleaseAll},
                     {"notify_running", ResponseOption::NotifyRunning}})
                   .value_or(ResponseOption::ReleaseAll);

  std::optional<Priority> prio = r.integer<Priority>(j, where, "priority", false);
  std::vector<JobPriorityOverride> overrides;
  if (const json* ov = r.field(j, where, "job_priority_overrides", false)) {
    const std::string at = where + ".job_priority_overrides";
    if (!ov->is_array()) {
      r.fail(at, "expected an array");
    } else {
      for (std::size_t k = 0; k < ov->size(); ++k) {
        const std::string w = at + "[" + std::to_string(k) + "]";
        const json& o = (*ov)[k];
        if (!r.object(o, w, {"seq_mod", "priority"})) continue;
        auto res = r.integer<std::uint32_t>(o, w, "seq_mod", true, 0);
        auto p = r.integer<Priority>(o, w, "priority", true);
        if (res && p) overrides.push_back({*res, *p});
      }
    }
  }
  ts.tasks.push_back(t);
  ts.explicit_priority.push_back(prio);
  ts.overrides.push_back(std::move(overrides));
}

void read_policy(Reader& r, const json& j, Policy& p) {
  const std::string where = "policy";
  if (!r.object(j, where,
                {"assignment", "fault_policy", "ipl_optimization",
                 "mask_until_bottom_half", "delta_th"}))
    return;
  p.assignment = r.choice<Assignment>(
                      j, where, "assignment", false,
                      {{"importance_monotonic", Assignment::ImportanceMonotonic},
                       {"explicit", Assignment::Explicit}})
                     .value_or(Assignment::ImportanceMonotonic);
  p.fault_policy = r.choice<FaultPolicy>(
                        j, where, "fault_policy", false,
                        {{"permanent", FaultPolicy::Permanent},
                         {"auto_resume", FaultPolicy::AutoResume}})
                       .value_or(FaultPolicy::Permanent);
  p.ipl_optimization = r.boolean(j, where, "ipl_optimization").value_or(false);
  p.mask_until_bottom_half =
      r.boolean(j, where, "mask_until_bottom_half").value_or(false);
  p.delta_th = r.integer<Tick>(j, where, "delta_th", false, 0).value_or(0);
}

std::optional<WorkloadSpec> read_workload(Reader& r, const json& j,
                                          const std::string& where) {
  if (!j.is_object()) {
    r.fail(where, "expected an object");
    return std::nullopt;
  }
  auto kind = r.string(j, where, "kind", true);
  auto line = r.integer<std::uint32_t>(j, where, "line", true, 0);
  if (!kind) {
    r.object(j, where, {"line", "kind"});
    return std::nullopt;
  }
  WorkloadSpec spec;
  spec.line = LineId{line.value_or(0)};
  if (*kind == "periodic") {
    r.object(j, where, {"line", "kind", "offset", "period"});
    Periodic k;
    k.offset = r.integer<Tick>(j, where, "offset", false, 0).value_or(0);
    k.period = r.integer<Tick>(j, where, "period", true, 1).value_or(1);
    spec.kind = k;
  } else if (*kind == "sporadic") {
    r.object(j, where, {"line", "kind", "min_sep", "density", "seed"});
    Sporadic k;
    k.min_sep = r.integer<Tick>(j, where, "min_sep", true, 1).value_or(1);
    k.density = r.number(j, where, "density", false).value_or(1.0);
    k.seed = r.integer<std::uint64_t>(j, where, "seed", false);
    spec.kind = k;
  } else if (*kind == "burst") {
    r.object(j, where, {"line", "kind", "at", "count", "spacing"});
    Burst k;
    k.at = r.integer<Tick>(j, where, "at", true, 0).value_or(0);
    k.count = r.integer<std::uint32_t>(j, where, "count", true, 0).value_or(0);
    k.spacing = r.integer<Tick>(j, where, "spacing", false, 0).value_or(0);
    spec.kind = k;
  } else if (*kind == "storm") {
    r.object(j, where, {"line", "kind", "start", "rate", "duration"});
    Storm k;
    k.start = r.integer<Tick>(j, where, "start", false, 0).value_or(0);
    k.rate = r.number(j, where, "rate", true).value_or(1.0);
    k.duration = r.integer<Tick>(j, where, "duration", false, 1);
    spec.kind = k;
  } else if (*kind == "explicit") {
    r.object(j, where, {"line", "kind", "times"});
    Explicit k;
    if (const json* times = r.field(j, where, "times", true)) {
      if (!times->is_array()) {
        r.fail(where + ".times", "expected an array of integers");
      } else {
        for (std::size_t i = 0; i < times->size(); ++i) {
          const json& v = (*times)[i];
          if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            r.fail(where + ".times[" + std::to_string(i) + "]",
                   "expected a non-negative integer");
            continue;
          }
          k.times.push_back(v.get<Tick>());
        }
      }
    }
    spec.kind = k;
  } else {
    r.fail(where + ".kind", "'" + *kind +
                                "' is not one of periodic, sporadic, burst, "
                                "storm, explicit");
    return std::nullopt;
  }
  if (!line) return std::nullopt;
  return spec;
}

std::string syntax_message(const nlohmann::json::parse_error& e,
                           std::string_view text) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::string what = e.what();
  if (auto pos = what.rfind(": "); pos != std::string::npos)
    what = what.substr(pos + 2);
  return "line " + std::to_string(line) + ", column " + std::to_string(col) +
         ": " + what;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError({syntax_message(e, text)});
  }

  Reader r;
  Scenario sc;
  if (!r.object(doc, "scenario", {"tasks", "policy", "workload", "horizon", "seed"}))
    throw ScenarioError(r.diag);

  if (const json* tasks = r.field(doc, "scenario", "tasks", true)) {
    if (!tasks->is_array() || tasks->empty()) {
      r.fail("tasks", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < tasks->size(); ++i)
        read_task(r, (*tasks)[i], "tasks[" + std::to_string(i) + "]", sc.tasks);
    }
  }
  if (const json* policy = r.field(doc, "scenario", "policy", false))
    read_policy(r, *policy, sc.policy);
  if (const json* wl = r.field(doc, "scenario", "workload", false)) {
    if (!wl->is_array()) {
      r.fail("workload", "expected an array");
    } else {
      for (std::size_t i = 0; i < wl->size(); ++i)
        if (auto spec = read_workload(r, (*wl)[i],
                                      "workload[" + std::to_string(i) + "]"))
          sc.workload.push_back(std::move(*spec));
    }
  }
  sc.horizon = r.integer<Tick>(doc, "scenario", "horizon", false, 1);
  sc.seed = r.integer<std::uint64_t>(doc, "scenario", "seed", false).value_or(0);

  if (!r.diag.empty()) throw ScenarioError(r.diag);
  if (auto diag = validate_scenario(sc); !diag.empty()) throw ScenarioError(diag);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({path + ": cannot open file"});
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioError& e) {
    std::vector<std::string> diag;
    for (const auto& d : e.diagnostics()) diag.push_back(path + ": " + d);
    throw ScenarioError(diag);
  }
}

std::string scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json doc;
  auto& tasks = doc["tasks"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sc.tasks.tasks.size(); ++i) {
    const auto& t = sc.tasks.tasks[i];
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["C"] = t.wcet;
    if (t.exception_only())
      j["T"] = "inf";
    else
      j["T"] = t.period;
    j["D"] = t.deadline;
    j["importance"] = t.importance;
    j["line"] = t.line.value;
    j["n"] = t.envelope_n;
    j["W"] = t.envelope_w;
    j["response"] = t.response == ResponseOption::ReleaseAll ? "release_all"
                                                             : "notify_running";
    if (i < sc.tasks.explicit_priority.size() && sc.tasks.explicit_priority[i])
      j["priority"] = *sc.tasks.explicit_priority[i];
    if (i < sc.tasks.overrides.size() && !sc.tasks.overrides[i].empty()) {
      auto& ov = j["job_priority_overrides"] = nlohmann::ordered_json::array();
      for (const auto& o : sc.tasks.overrides[i])
        ov.push_back({{"seq_mod", o.residue}, {"priority", o.priority}});
    }
    tasks.push_back(j);
  }
  const auto& p = sc.policy;
  doc["policy"] = {
      {"assignment", p.assignment == Assignment::Explicit ? "explicit"
                                                          : "importance_monotonic"},
      {"fault_policy",
       p.fault_policy == FaultPolicy::Permanent ? "permanent" : "auto_resume"},
      {"ipl_optimization", p.ipl_optimization},
      {"mask_until_bottom_half", p.mask_until_bottom_half},
      {"delta_th", p.delta_th}};
  auto& wl = doc["workload"] = nlohmann::ordered_json::array();
  for (const auto& w : sc.workload) {
    nlohmann::ordered_json j;
    j["line"] = w.line.value;
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Periodic>) {
            j["kind"] = "periodic";
            j["offset"] = k.offset;
            j["period"] = k.period;
          } else if constexpr (std::is_same_v<K, Sporadic>) {
            j["kind"] = "sporadic";
            j["min_sep"] = k.min_sep;
            j["density"] = k.density;
            if (k.seed) j["seed"] = *k.seed;
          } else if constexpr (std::is_same_v<K, Burst>) {
            j["kind"] = "burst";
            j["at"] = k.at;
            j["count"] = k.count;
            j["spacing"] = k.spacing;
          } else if constexpr (std::is_same_v<K, Storm>) {
            j["kind"] = "storm";
            j["start"] = k.start;
            j["rate"] = k.rate;
            if (k.duration) j["duration"] = *k.duration;
          } else {
            j["kind"] = "explicit";
            j["times"] = k.times;
          }
        },
        w.kind);
    wl.push_back(j);
  }
  if (sc.horizon) doc["horizon"] = *sc.horizon;
  doc["seed"] = sc.seed;
  return doc.dump(2) + "\n";
}

}  // namespace ooe
