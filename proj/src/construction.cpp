#include "lpso/construction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "lpso/error.hpp"

namespace lpso {

std::vector<double> lambda_grid(double eps, std::size_t count) {
  if (!(eps > 0 && eps < 1) || count == 0) throw DomainError("lambda window needs 0 < eps < 1");
  std::vector<double> out(count);
  double a = std::log(eps), w = -2.0 * a;
  for (std::size_t k = 0; k < count; ++k)
    out[k] = std::exp(a + w * (static_cast<double>(k) + 0.5) / static_cast<double>(count));
  return out;
}

EnergyGrid energy_grid_for(double lambda, double sup_norm, const GridSpec& g) {
  return EnergyGrid::covering(std::abs(lambda) * sup_norm + 4.0, g.energy_per_unit, g.min_energy_points,
                              g.max_energy_points);
}

namespace {

bool compare(double v, const std::string& rel, double b) {
  if (rel == "<") return v < b;
  if (rel == "<=") return v <= b;
  if (rel == ">") return v > b;
  if (rel == ">=") return v >= b;
  throw DomainError("unknown relation " + rel);
}

}  // namespace

Certificate Certificate::make(std::string name, double value, std::string relation, double bound,
                              bool required) {
  Certificate c;
  c.name = std::move(name);
  c.value = value;
  c.relation = std::move(relation);
  c.bound = bound;
  c.required = required;
  c.passed = compare(value, c.relation, bound);
  return c;
}

bool Certificate::recheck() const { return compare(value, relation, bound); }

std::size_t SamplerFamily::period() const {
  check();
  return members.front().period();
}

double SamplerFamily::sup_norm() const {
  double m = 0;
  for (const auto& f : members) m = std::max(m, f.sup_norm());
  return m;
}

double SamplerFamily::diameter() const {
  check();
  double d = 0;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b) d = std::max(d, sup_distance(members[a], members[b]));
  return d;
}

void SamplerFamily::check() const {
  if (members.empty()) throw DomainError("family must be nonempty");
  for (const auto& f : members)
    if (f.period() != members.front().period()) throw DomainError("family members must share one period");
}

PeriodicSampler probe_candidate(const PeriodicSampler& f, std::size_t tilde_p, std::int64_t n1,
                                std::int64_t j) {
  if (n1 <= 0) throw DomainError("N1 must be positive");
  auto v = f.promoted(tilde_p);
  std::vector<double> vals(v.values().begin(), v.values().end());
  vals[tilde_p - 1] += static_cast<double>(j) / static_cast<double>(n1);
  return PeriodicSampler(std::move(vals));
}

ProbeResult gap_opening_probe(const PeriodicSampler& f, std::size_t tilde_p, std::int64_t n1,
                              std::span<const double> lambdas, double tol, std::size_t max_candidates) {
  const auto p = static_cast<std::int64_t>(f.period());
  if (tilde_p % f.period() != 0) throw DomainError("probe period must be a multiple of the sampler period");
  if (n1 < 2 * p + 1) throw DomainError("N1 must be at least 2p + 1");
  ProbeResult res;
  std::int64_t last = 2 * p + 1;
  if (max_candidates > 0) last = std::min<std::int64_t>(last, static_cast<std::int64_t>(max_candidates));
  for (std::int64_t j = 1; j <= last; ++j) {
    ProbeReport rep;
    rep.j = j;
    rep.bump = static_cast<double>(j) / static_cast<double>(n1);
    rep.min_band_count = tilde_p;
    rep.min_gap = INFINITY;
    auto cand = probe_candidate(f, tilde_p, n1, j);
    for (double lam : lambdas) {
      auto s = band_spectrum(cand.scaled(lam), tol);
      rep.min_band_count = std::min(rep.min_band_count, s.bands.size());
      rep.min_gap = std::min(rep.min_gap, s.min_gap());
      if (s.bands.size() != tilde_p) break;
    }
    rep.opened = rep.min_band_count == tilde_p;
    res.reports.push_back(rep);
    if (rep.opened) {
      res.j0 = j;
      res.sampler = std::move(cand);
      res.min_gap = rep.min_gap;
      res.opened = true;
      return res;
    }
  }
  throw ProbeFailure(std::move(res.reports));
}

double EnlargeRecipe::shift(std::int64_t l) const {
  return 4.0 * std::numbers::pi * static_cast<double>(l) /
         (eps * static_cast<double>(tilde_p) * static_cast<double>(n2));
}

SamplerFamily realize(const EnlargeRecipe& recipe, const SamplerFamily& input) {
  input.check();
  if (recipe.j0.size() != input.size()) throw DomainError("one bump index per input member required");
  if (recipe.n2 < 1) throw DomainError("N2 must be positive");
  SamplerFamily out;
  auto push = [&](std::size_t i, const PeriodicSampler& base, std::int64_t l) {
    out.members.push_back(base.shifted(recipe.shift(l)));
    out.labels.push_back("(" + std::to_string(i + 1) + "," + std::to_string(l) + ")");
  };
  PeriodicSampler first;
  for (std::size_t i = 0; i < input.size(); ++i) {
    auto base = probe_candidate(input.members[i], recipe.tilde_p, recipe.n1, recipe.j0[i]);
    for (std::int64_t l = 0; l <= recipe.n2; ++l)
      if (i != 0 || l != 1) push(i, base, l);
    if (i == 0) first = base;
  }
  push(0, first, 1);
  return out;
}

FamilyExponents family_exponents(double energy, double lambda, std::span<const PeriodicSampler> family) {
  if (family.empty()) throw DomainError("family must be nonempty");
  double s = 0, m = 0;
  for (const auto& f : family) {
    double l = lyapunov_periodic(energy, f, lambda);
    s += l;
    m = std::max(m, l);
  }
  return {s / static_cast<double>(family.size()), m};
}

GridScan scan_grid(const ExponentFn& out, const ExponentFn* in, const ExponentFn* member_max,
                   std::span<const double> lambdas, double sup_norm, const GridSpec& g,
                   double energy_cutoff) {
  GridScan s;
  for (double lam : lambdas) {
    auto grid = energy_grid_for(lam, sup_norm, g);
    for (std::size_t k = 0; k < grid.count; ++k) {
      double e = grid.at(k);
      double lo = out(e, lam);
      ++s.points;
      if (lo < s.floor) s.floor = lo, s.floor_energy = e, s.floor_lambda = lam;
      if (member_max) {
        double mm = (*member_max)(e, lam);
        s.member_floor = std::min(s.member_floor, mm);
      }
      if (in && std::abs(e) < energy_cutoff) {
        double diff = std::abs(lo - (*in)(e, lam));
        if (diff > s.closeness) s.closeness = diff, s.close_energy = e, s.close_lambda = lam;
      }
    }
  }
  return s;
}

BlockConcatenation::BlockConcatenation(std::vector<PeriodicSampler> blocks, std::int64_t period, int exponent)
    : blocks_(std::move(blocks)), period_(period), exponent_(exponent) {
  if (blocks_.empty()) throw DomainError("concatenation needs at least one block sampler");
  const auto pt = static_cast<std::int64_t>(blocks_.front().period());
  for (const auto& b : blocks_)
    if (static_cast<std::int64_t>(b.period()) != pt) throw DomainError("block samplers must share one period");
  if (exponent < 1) throw DomainError("perturbation exponent must be positive");
  const auto m = static_cast<std::int64_t>(blocks_.size());
  if (period <= 0 || period % pt != 0) throw DomainError("target period must be a multiple of the block period");
  r_ = period / (m * pt);
  d_ = period - m * pt * r_;
  if (r_ < 2) throw DomainError("target period too small: need r >= 2");
  bump_unit_ = std::pow(static_cast<double>(r_), -exponent);
  const std::int64_t extended = d_ / pt;
  starts_.assign(1, 0);
  for (std::int64_t i = 0; i < m; ++i) starts_.push_back(starts_.back() + r_ + (i < extended ? 1 : 0));
  if (starts_.back() * pt != period) throw DomainError("block arithmetic inconsistent");
  // Rounding of f + b is monotone in b, so visibility is monotone in t.
  for (const auto& b : blocks_) {
    auto visible = [&](std::int64_t t) { return !(b.shifted(bump(t)) == b); };
    std::int64_t lo = 1, hi = r_;
    while (lo < hi) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (visible(mid)) hi = mid;
      else lo = mid + 1;
    }
    first_visible_.push_back(lo);
  }
}

std::int64_t BlockConcatenation::bump_block(std::size_t i) const {
  return i + 1 < blocks_.size() ? starts_[i + 1] - 1 : starts_[i + 1] - 2;
}

double BlockConcatenation::value(std::int64_t site, std::span<const std::int64_t> t) const {
  const auto pt = static_cast<std::int64_t>(block_period());
  std::int64_t s = site % period_;
  if (s < 0) s += period_;
  std::int64_t j = s / pt;
  auto i = static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), j) - starts_.begin() - 1);
  double v = blocks_[i](s % pt);
  if (!t.empty() && j == bump_block(i)) v += bump(t[i]);
  return v;
}

PeriodicSampler BlockConcatenation::materialize(std::span<const std::int64_t> t) const {
  std::vector<double> v(static_cast<std::size_t>(period_));
  for (std::int64_t s = 0; s < period_; ++s) v[static_cast<std::size_t>(s)] = value(s, t);
  return PeriodicSampler(std::move(v));
}

namespace {

ScaledMatrix block_product(const PeriodicSampler& f, double energy, double lambda) {
  return scaled_transfer_product(energy, f, static_cast<std::int64_t>(f.period()), 0, lambda);
}

}  // namespace

ScaledMatrix BlockConcatenation::monodromy(double energy, double lambda, std::span<const std::int64_t> t) const {
  ScaledMatrix total;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto plain = block_product(blocks_[i], energy, lambda);
    bool vis = !t.empty() && bump_visible(i, t[i]);
    auto bumped = vis ? block_product(blocks_[i].shifted(bump(t[i])), energy, lambda) : plain;
    auto len = static_cast<std::uint64_t>(segment_length(i));
    ScaledMatrix seg = i + 1 < blocks_.size() ? bumped * scaled_power(plain, len - 1)
                                              : plain * bumped * scaled_power(plain, len - 2);
    total = seg * total;
  }
  return total;
}

double BlockConcatenation::lyapunov(double energy, double lambda, std::span<const std::int64_t> t) const {
  return log_spectral_radius(monodromy(energy, lambda, t)) / static_cast<double>(period_);
}

double BlockConcatenation::mean_lyapunov(double energy, double lambda,
                                         const std::vector<std::vector<std::int64_t>>& ts) const {
  if (ts.empty()) throw DomainError("need at least one bump vector");
  const std::size_t m = blocks_.size();
  std::vector<ScaledMatrix> plain(m), lead(m);
  for (std::size_t i = 0; i < m; ++i) {
    plain[i] = block_product(blocks_[i], energy, lambda);
    auto len = static_cast<std::uint64_t>(segment_length(i));
    lead[i] = scaled_power(plain[i], i + 1 < m ? len - 1 : len - 2);
  }
  std::map<std::pair<std::size_t, std::int64_t>, ScaledMatrix> bumped;
  double sum = 0;
  for (const auto& t : ts) {
    ScaledMatrix total;
    for (std::size_t i = 0; i < m; ++i) {
      ScaledMatrix bm = plain[i];
      if (bump_visible(i, t[i])) {
        auto key = std::make_pair(i, t[i]);
        auto it = bumped.find(key);
        if (it == bumped.end()) it = bumped.emplace(key, block_product(blocks_[i].shifted(bump(t[i])), energy, lambda)).first;
        bm = it->second;
      }
      ScaledMatrix seg = i + 1 < m ? bm * lead[i] : plain[i] * bm * lead[i];
      total = seg * total;
    }
    sum += log_spectral_radius(total) / static_cast<double>(period_);
  }
  return sum / static_cast<double>(ts.size());
}

double BlockConcatenation::log_growth_at(double energy, double lambda) const {
  double best = 0;
  for (const auto& b : blocks_)
    best = std::max(best, scaled_power(block_product(b, energy, lambda), static_cast<std::uint64_t>(r_ - 2)).log_norm());
  return best;
}

std::vector<std::vector<std::int64_t>> bump_vectors(std::size_t m, std::int64_t r, std::size_t count,
                                                    std::uint64_t seed) {
  std::vector<std::vector<std::int64_t>> out;
  out.emplace_back(m, 0);
  if (count >= 2 && r > 1) out.emplace_back(m, r - 1);
  std::mt19937_64 rng(seed);
  while (out.size() < count) {
    std::vector<std::int64_t> t(m);
    for (auto& x : t) x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(r));
    out.push_back(std::move(t));
  }
  return out;
}

double ConcatenatedFamily::diameter() const {
  std::int64_t spread = 0;
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = a + 1; b < t.size(); ++b)
      for (std::size_t i = 0; i < base.members(); ++i) spread = std::max(spread, std::abs(t[a][i] - t[b][i]));
  return base.bump(spread);
}

ConcatenatedFamily concatenate_perturb(const SamplerFamily& tilde, std::int64_t target_period, int exponent,
                                       std::size_t sample_count, std::uint64_t seed) {
  tilde.check();
  BlockConcatenation base(tilde.members, target_period, exponent);
  auto ts = bump_vectors(base.members(), base.r(), std::max<std::size_t>(sample_count, 1), seed);
  return {std::move(base), std::move(ts)};
}

}  // namespace lpso
