#pragma once

#include <array>
#include <cstdint>

#include "lpso/sampler.hpp"

namespace lpso {

// 2x2 real matrix [[a, b], [c, d]]; for transfer matrices det = 1.
struct TransferMatrix {
  double a = 1, b = 0, c = 0, d = 1;

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  double max_abs() const;
  TransferMatrix operator*(const TransferMatrix& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  std::array<double, 2> apply(std::array<double, 2> v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }
  bool operator==(const TransferMatrix&) const = default;
};

// One step of psi(n+1) = (E - v) psi(n) - psi(n-1).
TransferMatrix step_matrix(double energy, double v);

// A_n = S_{offset+n-1} ... S_{offset} for the sequence f. No rescaling: long
// products overflow, use scaled_transfer_product for those.
TransferMatrix transfer_product(double energy, const PeriodicSampler& f, std::int64_t n,
                                std::int64_t offset = 0);

// Matrix value 2^exp2 * m, kept with max|m| near 1 so products never overflow.
struct ScaledMatrix {
  TransferMatrix m;
  std::int64_t exp2 = 0;

  ScaledMatrix operator*(const ScaledMatrix& o) const;
  void normalize();
  double log_norm() const;
  // log|det| of the represented matrix; zero up to rounding for SL(2,R).
  double log_abs_det() const;
};

ScaledMatrix scaled_transfer_product(double energy, const PeriodicSampler& f, std::int64_t n,
                                     std::int64_t offset = 0, double coupling = 1.0);
ScaledMatrix scaled_power(const ScaledMatrix& x, std::uint64_t k);

// Operator norm (largest singular value).
double largest_singular_value(const TransferMatrix& m);

// 1 if |tr| <= 2, else (|tr| + sqrt(tr^2 - 4)) / 2. Throws InvariantError if
// det differs from 1 by more than det_tol relative to the size of ad and bc.
double spectral_radius(const TransferMatrix& m, double det_tol = 1e-8);

// log of the spectral radius for a determinant-one matrix given in scaled form.
double log_spectral_radius(const ScaledMatrix& m);

struct AngleBounds {
  double mu1;      // largest singular value
  double m_lower;  // 1/(16 mu1^2)
  double m_upper;  // 16 mu1^2
};

// Bounds m_lower * dtheta <= dtheta' <= m_upper * dtheta for the angle
// between two vectors before and after applying m.
AngleBounds angle_distortion_bounds(const TransferMatrix& m, double det_tol = 1e-8);

// Unsigned angle between two nonzero vectors, in [0, pi].
double vector_angle(std::array<double, 2> u, std::array<double, 2> v);

}  // namespace lpso
