#include "lpso/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lpso/error.hpp"

namespace lpso {

bool GordonReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const GordonRow& r) { return r.passed && r.within_budget; });
}

double gordon_deviation(const std::vector<double>& values, std::int64_t lo, std::int64_t q) {
  if (q <= 0) throw DomainError("shift must be positive");
  auto at = [&](std::int64_t n) {
    std::int64_t k = n - lo;
    if (k < 0 || k >= static_cast<std::int64_t>(values.size())) throw DomainError("site outside sampled window");
    return values[static_cast<std::size_t>(k)];
  };
  double dev = 0;
  for (std::int64_t n = 1; n <= q; ++n)
    dev = std::max({dev, std::abs(at(n) - at(n + q)), std::abs(at(n) - at(n - q))});
  return dev;
}

GordonReport gordon_check(const ConstructionLedger& ledger, std::int64_t site_budget, double lambda) {
  if (ledger.stages.size() < 2) throw DomainError("Gordon check needs at least two stages");
  auto views = replay(ledger);
  if (views.size() < 2) throw DomainError("Gordon check needs two replayable stages");
  std::int64_t q_max = 0;
  for (std::size_t k = 0; k < views.size(); ++k)
    q_max = std::max(q_max, static_cast<std::int64_t>(ledger.stages[k].enlarge.tilde_p));
  if (site_budget < 3 * q_max) throw DomainError("site budget below 3 q_max");

  const auto& deepest = views.back().output;
  std::vector<double> v;
  for (std::int64_t n = -q_max; n <= 2 * q_max; ++n) v.push_back(lambda * deepest.distinguished_value(n));

  GordonReport rep;
  rep.lambda = lambda;
  for (std::size_t k = 0; k < views.size(); ++k) {
    GordonRow row;
    row.i = k + 1;
    row.q = static_cast<std::int64_t>(ledger.stages[k].enlarge.tilde_p);
    row.deviation = gordon_deviation(v, -q_max, row.q);
    row.log_threshold = -static_cast<double>(row.q) * std::log(static_cast<double>(row.i));
    row.passed = row.deviation == 0 || std::log(row.deviation) <= row.log_threshold;
    if (k + 1 < views.size()) {
      const auto& next = ledger.stages[k + 1];
      const auto& tilde = views[k + 1].enlarged;
      double p = static_cast<double>(next.period);
      double tail = 2.0 * std::exp(-static_cast<double>(row.i + 1) * std::log(p));
      row.budget = std::abs(lambda) * (tail + sup_distance(tilde.members.back(), tilde.members.front()));
      row.within_budget = row.deviation <= *row.budget;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

CoverEstimate cover_estimate(const BandSpectrum& s, double inflation, double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw DomainError("alpha must lie in (0, 1]");
  if (!(inflation >= 0)) throw DomainError("inflation must be nonnegative");
  CoverEstimate c;
  c.alpha = alpha;
  c.inflation = inflation;
  c.total_measure = s.total_measure();
  for (const auto& b : s.bands) {
    Band i{b.left - inflation, b.right + inflation};
    c.intervals.push_back(i);
    c.cover_sum += std::pow(i.length(), alpha);
  }
  return c;
}

CoverEstimate hausdorff_sum(const ConstructionLedger& ledger, std::size_t stage, double alpha, double lambda,
                            double threshold) {
  if (stage == 0 || stage > ledger.stages.size()) throw DomainError("no such stage");
  auto views = replay(ledger);
  if (stage > views.size()) throw DomainError("stage cannot be replayed");
  const auto& rec = ledger.stages[stage - 1];
  auto f = views[stage - 1].output.distinguished(ledger.config.search.max_materialized_period);
  const double p = static_cast<double>(rec.period);
  const double si = static_cast<double>(stage);
  const double inflation = std::abs(lambda) * std::exp(-si * std::log(p));
  auto c = cover_estimate(band_spectrum(f.scaled(lambda), ledger.config.tol), inflation, alpha);
  c.stage = stage;
  c.lambda = lambda;
  if (stage >= 2) {
    double prev_tp = static_cast<double>(ledger.stages[stage - 2].enlarge.tilde_p);
    c.closed_form = p * std::pow(std::exp(-prev_tp * std::sqrt(p)) + 2.0 * inflation, alpha);
  }
  c.below_threshold = c.cover_sum < threshold;
  return c;
}

double sup_difference(const ExponentFn& a, const ExponentFn& b, const EnergyGrid& grid, double lambda) {
  double d = 0;
  for (std::size_t k = 0; k < grid.count; ++k) {
    double e = grid.at(k);
    d = std::max(d, std::abs(a(e, lambda) - b(e, lambda)));
  }
  return d;
}

std::vector<ConvergenceRow> lyapunov_convergence(const ConstructionLedger& ledger, const EnergyGrid& grid,
                                                 double lambda) {
  if (ledger.stages.size() < 2) throw DomainError("convergence check needs at least two stages");
  auto views = replay(ledger);
  StageFamily base(SamplerFamily{{PeriodicSampler(ledger.config.base)}, {"f"}});
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 0; k < views.size(); ++k) {
    const StageFamily& prev = k == 0 ? base : views[k - 1].output;
    const StageFamily& cur = views[k].output;
    ExponentFn a = [&](double e, double l) { return cur.exponent(e, l); };
    ExponentFn b = [&](double e, double l) { return prev.exponent(e, l); };
    ConvergenceRow r;
    r.stage = k + 1;
    r.eps = ledger.stages[k].eps;
    r.sup_difference = sup_difference(a, b, grid, lambda);
    r.passed = r.sup_difference < r.eps;
    r.floor_conjecture = 8.0 / 9.0 * ledger.stages[k].delta;
    rows.push_back(r);
  }
  return rows;
}

SpectrumDistance spectrum_distance(const PeriodicSampler& f, const PeriodicSampler& g, double tol) {
  auto p = std::lcm(f.period(), g.period());
  auto sf = band_spectrum(f.promoted(p), tol), sg = band_spectrum(g.promoted(p), tol);
  SpectrumDistance d;
  d.distance = hausdorff_distance(sf, sg);
  d.sup_norm = sup_distance(f, g);
  d.tol = tol;
  d.passed = d.distance <= d.sup_norm + 2 * tol;
  return d;
}

bool spectrum_distance_check(const PeriodicSampler& f, const PeriodicSampler& g, double tol) {
  return spectrum_distance(f, g, tol).passed;
}

json to_json(const GordonReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["passed"] = r.passed();
  j["rows"] = json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"i", row.i},
                         {"q", row.q},
                         {"deviation", row.deviation},
                         {"log_threshold", row.log_threshold},
                         {"passed", row.passed},
                         {"budget", row.budget ? json(*row.budget) : json(nullptr)},
                         {"within_budget", row.within_budget}});
  return j;
}

json to_json(const CoverEstimate& c) {
  json j;
  j["stage"] = c.stage;
  j["alpha"] = c.alpha;
  j["lambda"] = c.lambda;
  j["inflation"] = c.inflation;
  j["total_measure"] = c.total_measure;
  j["cover_sum"] = c.cover_sum;
  j["closed_form"] = c.closed_form ? json(*c.closed_form) : json(nullptr);
  j["below_threshold"] = c.below_threshold;
  j["intervals"] = json::array();
  for (const auto& b : c.intervals) j["intervals"].push_back({b.left, b.right});
  return j;
}

std::string to_csv(const CoverEstimate& c) {
  std::ostringstream os;
  os.precision(17);
  os << "interval_index,left,right\n";
  for (std::size_t k = 0; k < c.intervals.size(); ++k)
    os << k << ',' << c.intervals[k].left << ',' << c.intervals[k].right << '\n';
  return os.str();
}

json to_json(const std::vector<ConvergenceRow>& rows) {
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"stage", r.stage},
                 {"sup_difference", r.sup_difference},
                 {"eps", r.eps},
                 {"passed", r.passed},
                 {"floor_conjecture", r.floor_conjecture},
                 {"floor_conjecture_checked", false}});
  return j;
}

json to_json(const SpectrumDistance& d) {
  return {{"distance", d.distance}, {"sup_norm", d.sup_norm}, {"tol", d.tol}, {"passed", d.passed}};
}

}  // namespace lpso
