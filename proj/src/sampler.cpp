#include "lpso/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lpso/error.hpp"

namespace lpso {

PeriodicSampler::PeriodicSampler(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("sampler needs at least one value");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("sampler values must be finite");
}

PeriodicSampler PeriodicSampler::constant(double c, std::size_t period) {
  if (period == 0) throw DomainError("period must be positive");
  return PeriodicSampler(std::vector<double>(period, c));
}

double PeriodicSampler::operator()(std::int64_t site) const {
  auto p = static_cast<std::int64_t>(values_.size());
  auto r = site % p;
  if (r < 0) r += p;
  return values_[static_cast<std::size_t>(r)];
}

double PeriodicSampler::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

PeriodicSampler PeriodicSampler::scaled(double lambda) const {
  if (!std::isfinite(lambda)) throw DomainError("coupling must be finite");
  std::vector<double> out(values_);
  for (double& v : out) v *= lambda;
  return PeriodicSampler(std::move(out));
}

PeriodicSampler PeriodicSampler::shifted(double c) const {
  std::vector<double> out(values_);
  for (double& v : out) v += c;
  return PeriodicSampler(std::move(out));
}

PeriodicSampler PeriodicSampler::promoted(std::size_t new_period) const {
  if (new_period == 0 || new_period % values_.size() != 0)
    throw DomainError("promoted period must be a multiple of the period");
  std::vector<double> out(new_period);
  for (std::size_t k = 0; k < new_period; ++k) out[k] = values_[k % values_.size()];
  return PeriodicSampler(std::move(out));
}

double sup_distance(const PeriodicSampler& f, const PeriodicSampler& g) {
  std::size_t l = std::lcm(f.period(), g.period());
  double m = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    auto s = static_cast<std::int64_t>(k);
    m = std::max(m, std::abs(f(s) - g(s)));
  }
  return m;
}

std::size_t minimal_period(const PeriodicSampler& f) {
  auto v = f.values();
  std::size_t p = v.size();
  for (std::size_t q = 1; q < p; ++q) {
    if (p % q) continue;
    bool ok = true;
    for (std::size_t k = q; k < p && ok; ++k) ok = v[k] == v[k - q];
    if (ok) return q;
  }
  return p;
}

}  // namespace lpso
