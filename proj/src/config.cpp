#include <cmath>
#include <set>

#include "lpso/error.hpp"
#include "lpso/ledger.hpp"

namespace lpso {

GroupSchedule RunConfig::schedule() const {
  return GroupSchedule::geometric(schedule_first, schedule_ratio, schedule_depth);
}

void RunConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string(what) + " must be positive");
  };
  positive(schedule_first >= 2, "schedule.first - 1");
  positive(schedule_ratio >= 2, "schedule.ratio - 1");
  positive(schedule_depth > 0, "schedule.depth");
  positive(std::isfinite(eps0) && eps0 > 0, "eps0");
  positive(stage_count > 0, "stage_count");
  positive(grid.energy_per_unit > 0, "grid.energy_per_unit");
  positive(grid.min_energy_points >= 2, "grid.min_energy_points - 1");
  positive(grid.max_energy_points >= grid.min_energy_points, "grid.max_energy_points - min + 1");
  positive(grid.lambda_count > 0, "grid.lambda_count");
  positive(search.max_evaluations > 0, "search.max_evaluations");
  positive(search.max_probe_period > 0, "search.max_probe_period");
  positive(search.max_probe_candidates > 0, "search.max_probe_candidates");
  positive(search.max_n2 > 0, "search.max_n2");
  positive(search.max_family_members > 0, "search.max_family_members");
  positive(search.materialized_members > 0, "search.materialized_members");
  positive(search.max_materialized_period > 0, "search.max_materialized_period");
  positive(tol > 0, "tol");
  positive(report_lambda > 0, "report_lambda");
  PeriodicSampler check(base);
  (void)check;
  (void)schedule();
}

json to_json(const RunConfig& c) {
  json j;
  j["schedule"] = {{"first", c.schedule_first}, {"ratio", c.schedule_ratio}, {"depth", c.schedule_depth}};
  j["base"] = c.base;
  j["eps0"] = c.eps0;
  j["stage_count"] = c.stage_count;
  j["grid"] = {{"energy_per_unit", c.grid.energy_per_unit},
               {"min_energy_points", c.grid.min_energy_points},
               {"max_energy_points", c.grid.max_energy_points},
               {"lambda_count", c.grid.lambda_count}};
  const auto& s = c.search;
  j["search"] = {{"max_evaluations", s.max_evaluations},
                 {"max_probe_period", s.max_probe_period},
                 {"max_probe_candidates", s.max_probe_candidates},
                 {"max_n2", s.max_n2},
                 {"max_family_members", s.max_family_members},
                 {"materialized_members", s.materialized_members},
                 {"max_materialized_period", s.max_materialized_period}};
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["report_lambda"] = c.report_lambda;
  return j;
}

namespace {

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ParseError("unknown key '" + k + "' in " + where);
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  only_keys(j, {"schedule", "base", "eps0", "stage_count", "grid", "search", "tol", "seed", "report_lambda"},
            "config");
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    only_keys(s, {"first", "ratio", "depth"}, "schedule");
    take(s, "first", c.schedule_first);
    take(s, "ratio", c.schedule_ratio);
    take(s, "depth", c.schedule_depth);
  }
  take(j, "base", c.base);
  take(j, "eps0", c.eps0);
  take(j, "stage_count", c.stage_count);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    only_keys(g, {"energy_per_unit", "min_energy_points", "max_energy_points", "lambda_count"}, "grid");
    take(g, "energy_per_unit", c.grid.energy_per_unit);
    take(g, "min_energy_points", c.grid.min_energy_points);
    take(g, "max_energy_points", c.grid.max_energy_points);
    take(g, "lambda_count", c.grid.lambda_count);
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    only_keys(s,
              {"max_evaluations", "max_probe_period", "max_probe_candidates", "max_n2", "max_family_members",
               "materialized_members", "max_materialized_period"},
              "search");
    take(s, "max_evaluations", c.search.max_evaluations);
    take(s, "max_probe_period", c.search.max_probe_period);
    take(s, "max_probe_candidates", c.search.max_probe_candidates);
    take(s, "max_n2", c.search.max_n2);
    take(s, "max_family_members", c.search.max_family_members);
    take(s, "materialized_members", c.search.materialized_members);
    take(s, "max_materialized_period", c.search.max_materialized_period);
  }
  take(j, "tol", c.tol);
  take(j, "seed", c.seed);
  take(j, "report_lambda", c.report_lambda);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return c;
}

}  // namespace lpso
