#include "lpso/sl2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpso/error.hpp"

namespace lpso {

namespace {

void check_det(const TransferMatrix& m, double det_tol) {
  double scale = std::max(1.0, std::abs(m.a * m.d) + std::abs(m.b * m.c));
  if (!(std::abs(m.det() - 1.0) <= det_tol * scale))
    throw InvariantError("matrix determinant is not 1");
}

}  // namespace

double TransferMatrix::max_abs() const {
  return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
}

TransferMatrix step_matrix(double energy, double v) {
  if (!std::isfinite(energy) || !std::isfinite(v)) throw DomainError("non-finite energy or potential");
  return {energy - v, -1.0, 1.0, 0.0};
}

TransferMatrix transfer_product(double energy, const PeriodicSampler& f, std::int64_t n,
                                std::int64_t offset) {
  if (n < 0) throw DomainError("product length must be non-negative");
  if (!std::isfinite(energy)) throw DomainError("non-finite energy");
  TransferMatrix m;
  for (std::int64_t k = offset; k < offset + n; ++k) m = step_matrix(energy, f(k)) * m;
  return m;
}

void ScaledMatrix::normalize() {
  double mx = m.max_abs();
  if (mx == 0.0 || !std::isfinite(mx)) return;
  int e = std::ilogb(mx);
  if (e > 64 || e < -64) {
    m.a = std::ldexp(m.a, -e);
    m.b = std::ldexp(m.b, -e);
    m.c = std::ldexp(m.c, -e);
    m.d = std::ldexp(m.d, -e);
    exp2 += e;
  }
}

ScaledMatrix ScaledMatrix::operator*(const ScaledMatrix& o) const {
  ScaledMatrix r{m * o.m, exp2 + o.exp2};
  r.normalize();
  return r;
}

double ScaledMatrix::log_norm() const {
  return std::log(largest_singular_value(m)) + static_cast<double>(exp2) * std::numbers::ln2;
}

double ScaledMatrix::log_abs_det() const {
  return std::log(std::abs(m.det())) + 2.0 * static_cast<double>(exp2) * std::numbers::ln2;
}

ScaledMatrix scaled_transfer_product(double energy, const PeriodicSampler& f, std::int64_t n,
                                     std::int64_t offset, double coupling) {
  if (n < 0) throw DomainError("product length must be non-negative");
  if (!std::isfinite(energy)) throw DomainError("non-finite energy");
  ScaledMatrix s;
  auto vals = f.values();
  auto p = static_cast<std::int64_t>(vals.size());
  std::int64_t r = offset % p;
  if (r < 0) r += p;
  double a = 1, b = 0, c = 0, d = 1;
  for (std::int64_t k = 0; k < n; ++k) {
    double t = energy - coupling * vals[static_cast<std::size_t>(r)];
    double na = t * a - c, nb = t * b - d;
    c = a;
    d = b;
    a = na;
    b = nb;
    if (++r == p) r = 0;
    if ((k & 7) == 7 || std::abs(a) > 1e150 || std::abs(b) > 1e150) {
      s.m = {a, b, c, d};
      s.normalize();
      a = s.m.a, b = s.m.b, c = s.m.c, d = s.m.d;
    }
  }
  s.m = {a, b, c, d};
  s.normalize();
  return s;
}

ScaledMatrix scaled_power(const ScaledMatrix& x, std::uint64_t k) {
  ScaledMatrix result, base = x;
  while (k) {
    if (k & 1) result = base * result;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

double largest_singular_value(const TransferMatrix& m) {
  return 0.5 * (std::hypot(m.a + m.d, m.b - m.c) + std::hypot(m.a - m.d, m.b + m.c));
}

double spectral_radius(const TransferMatrix& m, double det_tol) {
  check_det(m, det_tol);
  double t = std::abs(m.trace());
  if (t <= 2.0) return 1.0;
  return 0.5 * (t + std::sqrt((t - 2.0) * (t + 2.0)));
}

double log_spectral_radius(const ScaledMatrix& s) {
  double t = std::abs(s.m.trace());
  if (t == 0.0 || !std::isfinite(t)) return t == 0.0 ? 0.0 : INFINITY;
  // log(|tr| / 2)
  double lx = std::log(t) + (static_cast<double>(s.exp2) - 1.0) * std::numbers::ln2;
  if (lx <= 0.0) return 0.0;
  if (lx < 20.0) return std::acosh(std::exp(lx));
  return lx + std::log1p(std::sqrt(-std::expm1(-2.0 * lx)));
}

AngleBounds angle_distortion_bounds(const TransferMatrix& m, double det_tol) {
  check_det(m, det_tol);
  double mu = largest_singular_value(m);
  double mu2 = mu * mu;
  return {mu, 1.0 / (16.0 * mu2), 16.0 * mu2};
}

double vector_angle(std::array<double, 2> u, std::array<double, 2> v) {
  double cross = u[0] * v[1] - u[1] * v[0];
  double dot = u[0] * v[0] + u[1] * v[1];
  return std::atan2(std::abs(cross), dot);
}

}  // namespace lpso
