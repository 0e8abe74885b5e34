#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpso/periodic.hpp"
#include "lpso/sampler.hpp"
#include "lpso/sl2.hpp"

namespace lpso {

struct GridSpec {
  double energy_per_unit = 1000;
  std::size_t min_energy_points = 1001;
  std::size_t max_energy_points = 2001;
  std::size_t lambda_count = 5;
};

// count log-uniform interior points of (eps, 1/eps)
std::vector<double> lambda_grid(double eps, std::size_t count);
// [-(lambda*norm + 4), lambda*norm + 4]; beyond it L >= 1 in closed form.
EnergyGrid energy_grid_for(double lambda, double sup_norm, const GridSpec& g);

// A measured quantity compared against a threshold.
struct Certificate {
  std::string name;
  double value = 0;
  std::string relation;  // "<", "<=", ">", ">="
  double bound = 0;
  bool passed = false;
  bool required = true;
  std::optional<double> witness_energy, witness_lambda;

  static Certificate make(std::string name, double value, std::string relation, double bound,
                          bool required = true);
  bool recheck() const;  // re-evaluates the relation
};

struct SamplerFamily {
  std::vector<PeriodicSampler> members;
  std::vector<std::string> labels;

  std::size_t size() const { return members.size(); }
  std::size_t period() const;
  double sup_norm() const;
  double diameter() const;  // max pairwise sup distance
  void check() const;       // nonempty, common period
};

struct ProbeReport {
  std::int64_t j = 0;
  double bump = 0;
  std::size_t min_band_count = 0;  // over the lambda grid
  double min_gap = 0;
  bool opened = false;
};

struct ProbeResult {
  std::int64_t j0 = 0;
  PeriodicSampler sampler;
  double min_gap = 0;
  bool opened = false;
  std::vector<ProbeReport> reports;
};

struct ProbeFailure : std::runtime_error {
  ProbeFailure(std::vector<ProbeReport> r)
      : std::runtime_error("no bump candidate opens all gaps"), reports(std::move(r)) {}
  std::vector<ProbeReport> reports;
};

// f promoted to period tilde_p with value += j/n1 at site tilde_p - 1.
PeriodicSampler probe_candidate(const PeriodicSampler& f, std::size_t tilde_p, std::int64_t n1,
                                std::int64_t j);

// First j in 1..2p+1 whose candidate has exactly tilde_p open bands for every
// lambda in the grid. Throws ProbeFailure otherwise. max_candidates > 0 stops
// after that many j; each candidate stops at its first failing lambda.
ProbeResult gap_opening_probe(const PeriodicSampler& f, std::size_t tilde_p, std::int64_t n1,
                              std::span<const double> lambdas, double tol = 1e-10,
                              std::size_t max_candidates = 0);

// Constant-shift enlargement of a family: recipe plus realization.
struct EnlargeRecipe {
  double eps = 0.1;
  std::size_t tilde_p = 2;
  std::int64_t n1 = 3, n2 = 1;
  std::vector<std::int64_t> j0;  // chosen bump index per input member

  double shift(std::int64_t l) const;  // 4 pi l / (eps tilde_p n2)
  double shift_step() const { return shift(1); }
};

// Members f~(i) + shift(l), ordered so the first is (1,0) and the last (1,1).
SamplerFamily realize(const EnlargeRecipe& recipe, const SamplerFamily& input);

struct GridScan {
  double floor = INFINITY;  // min of the output family exponent
  double floor_energy = 0, floor_lambda = 0;
  double closeness = 0;  // sup |L_out - L_in| over points with |E| < cutoff
  double close_energy = 0, close_lambda = 0;
  double member_floor = INFINITY;  // min over points of max over members
  std::size_t points = 0;
};

// Evaluates one family (and optionally a reference) over the stage grid.
// member_fn, when given, returns the max member exponent at (E, lambda).
using ExponentFn = std::function<double(double energy, double lambda)>;
GridScan scan_grid(const ExponentFn& out, const ExponentFn* in, const ExponentFn* member_max,
                   std::span<const double> lambdas, double sup_norm, const GridSpec& g,
                   double energy_cutoff);

// Family exponent plus max member exponent in one pass.
struct FamilyExponents {
  double mean, max;
};
FamilyExponents family_exponents(double energy, double lambda, std::span<const PeriodicSampler> family);

// Block concatenation of m samplers of period p~ with r^{-N} t bumps.
class BlockConcatenation {
 public:
  BlockConcatenation(std::vector<PeriodicSampler> blocks, std::int64_t period, int exponent);

  std::size_t members() const { return blocks_.size(); }
  std::size_t block_period() const { return blocks_.front().period(); }
  std::int64_t period() const { return period_; }
  std::int64_t r() const { return r_; }
  std::int64_t d() const { return d_; }
  int exponent() const { return exponent_; }
  double bump_unit() const { return bump_unit_; }  // r^{-N}
  double bump(std::int64_t t) const { return bump_unit_ * static_cast<double>(t); }
  // 0-based segment i covers blocks [start, start + length)
  std::int64_t segment_start(std::size_t i) const { return starts_[i]; }
  std::int64_t segment_length(std::size_t i) const { return starts_[i + 1] - starts_[i]; }
  std::int64_t bump_block(std::size_t i) const;
  const std::vector<PeriodicSampler>& blocks() const { return blocks_; }
  // False when f_i + bump(t) rounds back to f_i at every site of the block.
  bool bump_visible(std::size_t i, std::int64_t t) const { return t >= first_visible_[i]; }

  double value(std::int64_t site, std::span<const std::int64_t> t) const;
  PeriodicSampler materialize(std::span<const std::int64_t> t) const;
  ScaledMatrix monodromy(double energy, double lambda, std::span<const std::int64_t> t) const;
  double lyapunov(double energy, double lambda, std::span<const std::int64_t> t) const;
  // Mean exponent over several bump vectors, sharing the unbumped block products.
  double mean_lyapunov(double energy, double lambda,
                       const std::vector<std::vector<std::int64_t>>& ts) const;
  // max over segments of log ||A_{(r-2) p~}|| started at
  // the segment start, i.e. log ||M_i^{r-2}||.
  double log_growth_at(double energy, double lambda) const;

 private:
  std::vector<PeriodicSampler> blocks_;
  std::int64_t period_, r_, d_;
  int exponent_;
  double bump_unit_;
  std::vector<std::int64_t> starts_;  // m + 1 entries
  std::vector<std::int64_t> first_visible_;
};

// Deterministic subset of {0..r-1}^m: all zeros, all r-1, then extra seeded draws.
std::vector<std::vector<std::int64_t>> bump_vectors(std::size_t m, std::int64_t r, std::size_t count,
                                                    std::uint64_t seed);

struct ConcatenatedFamily {
  BlockConcatenation base;
  std::vector<std::vector<std::int64_t>> t;

  double family_lyapunov(double energy, double lambda) const { return base.mean_lyapunov(energy, lambda, t); }
  // max over pairs of r^{-N} max_i |t_i - t'_i|; bumps sit on disjoint blocks, so
  // this is the exact sup distance even when the bumps are below double resolution
  double diameter() const;
};

ConcatenatedFamily concatenate_perturb(const SamplerFamily& tilde, std::int64_t target_period, int exponent,
                                       std::size_t sample_count = 3, std::uint64_t seed = 0);

}  // namespace lpso
