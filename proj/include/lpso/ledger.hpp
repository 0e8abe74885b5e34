#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lpso/cantor.hpp"
#include "lpso/construction.hpp"
#include "lpso/io.hpp"

namespace lpso {

struct SearchBudget {
  std::size_t max_evaluations = 10000;  // probe candidates plus parameter candidates
  std::size_t max_probe_period = 1024;
  std::size_t max_probe_candidates = 4;  // per probe call, out of 2p+1
  std::int64_t max_n2 = 1024;
  std::size_t max_family_members = 1024;
  std::size_t materialized_members = 3;  // bump vectors kept per concatenation
  std::int64_t max_materialized_period = std::int64_t{1} << 22;
};

struct RunConfig {
  std::int64_t schedule_first = 2, schedule_ratio = 2;
  std::size_t schedule_depth = 62;
  std::vector<double> base{0.0};
  double eps0 = 1.0;
  std::size_t stage_count = 2;
  GridSpec grid;
  SearchBudget search;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  double report_lambda = 1.0;  // coupling used for stored band measures

  GroupSchedule schedule() const;
  void validate() const;  // throws DomainError
};

json to_json(const RunConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const json& j);

struct ConcatRecord {
  std::int64_t period = 0;
  int exponent = 0;
  std::int64_t r = 0, d = 0;
  std::size_t m = 0;
  std::vector<std::vector<std::int64_t>> t;
};

struct StageRecord {
  std::size_t index = 0;
  double eps = 0;
  double delta = 0;         // certified floor handed to the next stage
  double tilde_delta = 0;   // enlarged-family floor
  double member_floor = 0;  // min over the grid of the best member exponent
  double probe_min_gap = 0;
  bool probe_opened = false;
  std::vector<double> lambdas;
  EnlargeRecipe enlarge;
  std::optional<ConcatRecord> concat;
  std::int64_t period = 0;  // p_i
  std::size_t family_size = 0;
  double diameter = 0;
  double band_measure = 0;  // at report_lambda, direct or certified upper bound
  bool measure_is_bound = false;
  std::vector<Certificate> certificates;
  std::size_t evaluations = 0;
  std::string failure;  // first failing required certificate, empty if none

  bool passed() const { return failure.empty(); }
  const Certificate* find(const std::string& name) const;
};

struct ConstructionLedger {
  RunConfig config;
  std::vector<StageRecord> stages;
  std::string status;  // "complete", "failed", "aborted"

  bool passed() const;
};

json to_json(const ConstructionLedger& l);
ConstructionLedger ledger_from_json(const json& j);

// Output family of one stage, rebuilt from the ledger recipes.
class StageFamily {
 public:
  explicit StageFamily(SamplerFamily explicit_family);
  explicit StageFamily(ConcatenatedFamily concat);

  bool is_concatenation() const { return std::holds_alternative<ConcatenatedFamily>(f_); }
  std::int64_t period() const;
  std::size_t size() const;
  double exponent(double energy, double lambda) const;  // family Lyapunov exponent
  double distinguished_value(std::int64_t site) const;
  // Throws DomainError when the period exceeds limit.
  PeriodicSampler distinguished(std::int64_t limit) const;
  SamplerFamily materialize(std::int64_t limit) const;
  double diameter() const;
  const SamplerFamily* explicit_family() const { return std::get_if<SamplerFamily>(&f_); }
  const ConcatenatedFamily* concatenation() const { return std::get_if<ConcatenatedFamily>(&f_); }

 private:
  std::variant<SamplerFamily, ConcatenatedFamily> f_;
};

struct StageView {
  SamplerFamily enlarged;  // F~ of the stage
  StageFamily output;      // F_i
};

// Replays every stage recipe. Stages whose input cannot be materialized are omitted.
std::vector<StageView> replay(const ConstructionLedger& l);

// Runs the staged construction. Failures are recorded in the ledger, not thrown.
ConstructionLedger iterate(const RunConfig& config, std::size_t stage_count);

}  // namespace lpso
