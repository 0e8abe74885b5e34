#include "lpso/cantor.hpp"

#include <numeric>
#include <set>

#include "lpso/error.hpp"

namespace lpso {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t n) {
  auto r = a % n;
  return r < 0 ? r + n : r;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t n) {
  return static_cast<std::int64_t>(static_cast<__int128>(mod(a, n)) * mod(b, n) % n);
}

void check_level(const GroupSchedule& s, std::size_t level) {
  if (level == 0 || level > s.depth()) throw DomainError("level out of range");
}

void check_table(const PeriodicSampler& f, const GroupSchedule& s, std::size_t level) {
  check_level(s, level);
  if (s.index(level) % static_cast<std::int64_t>(f.period()) != 0)
    throw DomainError("sampler period must divide the level index");
}

}  // namespace

GroupSchedule::GroupSchedule(std::vector<std::int64_t> indices) : n_(std::move(indices)) {
  if (n_.empty()) throw DomainError("schedule needs at least one level");
  if (n_[0] < 2) throw DomainError("n_1 must be at least 2");
  for (std::size_t k = 1; k < n_.size(); ++k)
    if (n_[k] <= n_[k - 1] || n_[k] % n_[k - 1] != 0)
      throw DomainError("schedule indices must strictly increase and divide each other");
}

GroupSchedule GroupSchedule::geometric(std::int64_t first, std::int64_t ratio, std::size_t depth) {
  if (ratio < 2 || depth == 0) throw DomainError("geometric schedule needs ratio >= 2, depth >= 1");
  std::vector<std::int64_t> n{first};
  for (std::size_t k = 1; k < depth; ++k) {
    if (n.back() > INT64_MAX / ratio) throw DomainError("schedule overflows 64-bit indices");
    n.push_back(n.back() * ratio);
  }
  return GroupSchedule(std::move(n));
}

std::int64_t GroupSchedule::index(std::size_t level) const {
  check_level(*this, level);
  return n_[level - 1];
}

std::size_t GroupSchedule::level_of_multiple(std::int64_t p) const {
  for (std::size_t k = 0; k < n_.size(); ++k)
    if (n_[k] % p == 0) return k + 1;
  return 0;
}

OdometerElement OdometerElement::identity(const GroupSchedule& s) {
  return OdometerElement(s, std::vector<std::int64_t>(s.depth(), 0));
}

OdometerElement OdometerElement::from_integer(const GroupSchedule& s, std::int64_t n) {
  std::vector<std::int64_t> d(s.depth());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = mod(n, s.indices()[k]);
  return OdometerElement(s, std::move(d));
}

OdometerElement::OdometerElement(GroupSchedule s, std::vector<std::int64_t> digits)
    : schedule_(std::move(s)), d_(std::move(digits)) {
  const auto& n = schedule_.indices();
  if (d_.size() != n.size()) throw DomainError("one digit per level required");
  for (std::size_t k = 0; k < d_.size(); ++k) {
    if (d_[k] < 0 || d_[k] >= n[k]) throw DomainError("digit out of range");
    if (k > 0 && d_[k] % n[k - 1] != d_[k - 1]) throw DomainError("digits inconsistent under projection");
  }
}

std::int64_t OdometerElement::digit(std::size_t level) const {
  check_level(schedule_, level);
  return d_[level - 1];
}

Translation::Translation(OdometerElement generator) : g_(std::move(generator)) {
  if (!is_minimal(g_)) throw DomainError("translation is not minimal");
}

Translation Translation::adding_machine(const GroupSchedule& s) {
  return Translation(OdometerElement::from_integer(s, 1));
}

bool Translation::is_minimal(const OdometerElement& g) {
  const auto& n = g.schedule().indices();
  for (std::size_t k = 0; k < n.size(); ++k)
    if (std::gcd(g.digits()[k], n[k]) != 1) return false;
  return true;
}

OdometerElement translate(const Translation& t, const OdometerElement& omega, std::int64_t n) {
  const auto& s = omega.schedule();
  if (!(s == t.generator().schedule())) throw DomainError("schedule mismatch");
  std::vector<std::int64_t> d(s.depth());
  for (std::size_t k = 0; k < d.size(); ++k) {
    auto nk = s.indices()[k];
    d[k] = mod(omega.digits()[k] + mulmod(n, t.generator().digits()[k], nk), nk);
  }
  return OdometerElement(s, std::move(d));
}

std::vector<double> orbit_potential(const PeriodicSampler& f, std::size_t level, const Translation& t,
                                    const OdometerElement& omega, std::int64_t lo, std::int64_t hi) {
  const auto& s = omega.schedule();
  check_table(f, s, level);
  if (!(s == t.generator().schedule())) throw DomainError("schedule mismatch");
  auto nk = s.index(level);
  auto g = t.generator().digit(level), w = omega.digit(level);
  std::vector<double> v;
  for (std::int64_t n = lo; n <= hi; ++n) v.push_back(f(mod(w + mulmod(n, g, nk), nk)));
  return v;
}

PeriodicSampler periodize(const PeriodicSampler& f, const GroupSchedule& s, std::size_t level,
                          std::size_t target_level) {
  check_table(f, s, level);
  check_level(s, target_level);
  if (target_level > level) throw DomainError("target level must not exceed the sampler level");
  auto nk = s.index(level), nj = s.index(target_level);
  std::vector<double> out(static_cast<std::size_t>(nj), 0.0);
  for (std::int64_t x = 0; x < nk; ++x) out[static_cast<std::size_t>(x % nj)] += f(x);
  for (double& v : out) v /= static_cast<double>(nk / nj);
  return PeriodicSampler(std::move(out));
}

bool is_periodic_wrt(const PeriodicSampler& f, std::size_t level, const Translation& t, std::int64_t n0) {
  const auto& s = t.generator().schedule();
  check_table(f, s, level);
  auto nk = s.index(level);
  auto step = mulmod(n0, t.generator().digit(level), nk);
  for (std::int64_t x = 0; x < nk; ++x)
    if (f(mod(x + step, nk)) != f(x)) return false;
  return true;
}

bool period_independence_check(const PeriodicSampler& f, std::size_t level, const Translation& t1,
                               const Translation& t2, std::int64_t n0) {
  return is_periodic_wrt(f, level, t1, n0) && is_periodic_wrt(f, level, t2, n0);
}

std::size_t hull_size(const PeriodicSampler& f, std::size_t level, const Translation& t,
                      const OdometerElement& omega) {
  auto nk = omega.schedule().index(level);
  auto v = orbit_potential(f, level, t, omega, 0, 2 * nk - 1);
  std::set<std::vector<double>> shifts;
  for (std::int64_t m = 0; m < nk; ++m)
    shifts.emplace(v.begin() + m, v.begin() + m + nk);
  return shifts.size();
}

}  // namespace lpso
