#pragma once

#include <cstdint>
#include <vector>

#include "lpso/sampler.hpp"

namespace lpso {

// Indices n_1 | n_2 | ... | n_K of the odometer Z/n_1 <- Z/n_2 <- ...
class GroupSchedule {
 public:
  explicit GroupSchedule(std::vector<std::int64_t> indices);
  // n_k = first * ratio^(k-1), k = 1..depth
  static GroupSchedule geometric(std::int64_t first, std::int64_t ratio, std::size_t depth);

  std::size_t depth() const { return n_.size(); }
  // 1-based level
  std::int64_t index(std::size_t level) const;
  const std::vector<std::int64_t>& indices() const { return n_; }
  // Smallest level whose index is a multiple of p, or 0 if none.
  std::size_t level_of_multiple(std::int64_t p) const;
  bool operator==(const GroupSchedule&) const = default;

 private:
  std::vector<std::int64_t> n_;
};

class OdometerElement {
 public:
  static OdometerElement identity(const GroupSchedule& s);
  // Image of the integer n under Z -> Omega.
  static OdometerElement from_integer(const GroupSchedule& s, std::int64_t n);
  OdometerElement(GroupSchedule s, std::vector<std::int64_t> digits);

  const GroupSchedule& schedule() const { return schedule_; }
  std::int64_t digit(std::size_t level) const;
  const std::vector<std::int64_t>& digits() const { return d_; }
  bool operator==(const OdometerElement&) const = default;

 private:
  GroupSchedule schedule_;
  std::vector<std::int64_t> d_;
};

class Translation {
 public:
  // Throws DomainError unless every digit of the generator is a unit mod n_k.
  explicit Translation(OdometerElement generator);
  static Translation adding_machine(const GroupSchedule& s);
  static bool is_minimal(const OdometerElement& generator);
  const OdometerElement& generator() const { return g_; }

 private:
  OdometerElement g_;
};

OdometerElement translate(const Translation& t, const OdometerElement& omega, std::int64_t n);

// V(n) = f(level-k digit of T^n omega) for n in [lo, hi].
std::vector<double> orbit_potential(const PeriodicSampler& f, std::size_t level, const Translation& t,
                                    const OdometerElement& omega, std::int64_t lo, std::int64_t hi);

// Averages a level-k residue table over the cosets of the level-j subgroup.
PeriodicSampler periodize(const PeriodicSampler& f, const GroupSchedule& s, std::size_t level,
                          std::size_t target_level);

// f o T^n0 = f on every level-k residue.
bool is_periodic_wrt(const PeriodicSampler& f, std::size_t level, const Translation& t, std::int64_t n0);

// True iff f o T1^n0 = f and f o T2^n0 = f.
bool period_independence_check(const PeriodicSampler& f, std::size_t level, const Translation& t1,
                               const Translation& t2, std::int64_t n0);

// Number of distinct shifts of the level-k orbit potential over one period.
std::size_t hull_size(const PeriodicSampler& f, std::size_t level, const Translation& t,
                      const OdometerElement& omega);

}  // namespace lpso
