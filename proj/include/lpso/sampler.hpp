#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lpso {

// A p-periodic real sequence, stored as one period of values.
class PeriodicSampler {
 public:
  PeriodicSampler() : values_{0.0} {}
  explicit PeriodicSampler(std::vector<double> values);

  static PeriodicSampler constant(double c, std::size_t period = 1);

  std::size_t period() const { return values_.size(); }
  double operator()(std::int64_t site) const;
  std::span<const double> values() const { return values_; }
  double sup_norm() const;

  PeriodicSampler scaled(double lambda) const;
  PeriodicSampler shifted(double c) const;
  // Same sequence written with a longer period; new_period must be a multiple.
  PeriodicSampler promoted(std::size_t new_period) const;

  bool operator==(const PeriodicSampler&) const = default;

 private:
  std::vector<double> values_;
};

// Supremum distance between the two sequences on Z.
double sup_distance(const PeriodicSampler& f, const PeriodicSampler& g);

// Smallest period of the sequence (divides period()).
std::size_t minimal_period(const PeriodicSampler& f);

}  // namespace lpso
