#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpso/ledger.hpp"

namespace lpso {

struct GordonRow {
  std::size_t i = 0;
  std::int64_t q = 0;
  double deviation = 0;      // max_{1<=n<=q} |V(n) - V(n +- q)|
  double log_threshold = 0;  // log i^{-q}
  bool passed = false;
  // 2 p_{i+1}^{-(i+1)} + ||last - first|| of the next enlarged family, when that stage exists
  std::optional<double> budget;
  bool within_budget = true;
};

struct GordonReport {
  std::vector<GordonRow> rows;
  double lambda = 1;
  bool passed() const;
};

// Deviation of V on [1, q] against shifts by +-q. values[k] holds V(lo + k).
double gordon_deviation(const std::vector<double>& values, std::int64_t lo, std::int64_t q);

// Throws DomainError when the ledger has fewer than two stages or site_budget < 3 q_max.
GordonReport gordon_check(const ConstructionLedger& ledger, std::int64_t site_budget, double lambda = 1.0);

struct CoverEstimate {
  std::size_t stage = 0;
  double alpha = 1, lambda = 1, inflation = 0;
  std::vector<Band> intervals;  // inflated bands
  double total_measure = 0;     // of the uninflated bands
  double cover_sum = 0;         // sum of |interval|^alpha
  std::optional<double> closed_form;
  bool below_threshold = false;
};

CoverEstimate cover_estimate(const BandSpectrum& s, double inflation, double alpha);

// Inflation lambda p_i^{-i}. Throws DomainError if the stage cannot be materialized.
CoverEstimate hausdorff_sum(const ConstructionLedger& ledger, std::size_t stage, double alpha, double lambda,
                            double threshold = 1e-3);

struct ConvergenceRow {
  std::size_t stage = 0;
  double sup_difference = 0;
  double eps = 0;
  bool passed = false;
  double floor_conjecture = 0;  // (8/9) delta_i, observational only
};

// sup over the grid of |a - b|.
double sup_difference(const ExponentFn& a, const ExponentFn& b, const EnergyGrid& grid, double lambda);

std::vector<ConvergenceRow> lyapunov_convergence(const ConstructionLedger& ledger, const EnergyGrid& grid,
                                                 double lambda);

struct SpectrumDistance {
  double distance = 0, sup_norm = 0, tol = 0;
  bool passed = false;
};
SpectrumDistance spectrum_distance(const PeriodicSampler& f, const PeriodicSampler& g, double tol = 1e-10);
bool spectrum_distance_check(const PeriodicSampler& f, const PeriodicSampler& g, double tol = 1e-10);

json to_json(const GordonReport& r);
json to_json(const CoverEstimate& c);
std::string to_csv(const CoverEstimate& c);
json to_json(const std::vector<ConvergenceRow>& rows);
json to_json(const SpectrumDistance& d);

}  // namespace lpso
