#include "lpso/periodic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "lpso/error.hpp"

namespace lpso {

double BandSpectrum::total_measure() const {
  double s = 0;
  for (const auto& b : bands) s += b.length();
  return s;
}

double BandSpectrum::max_band_length() const {
  double m = 0;
  for (const auto& b : bands) m = std::max(m, b.length());
  return m;
}

double BandSpectrum::min_gap() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t z = 1; z < bands.size(); ++z) m = std::min(m, bands[z].left - bands[z - 1].right);
  return m;
}

double EnergyGrid::at(std::size_t i) const {
  if (i + 1 == count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

EnergyGrid EnergyGrid::covering(double radius, double per_unit, std::size_t min_points,
                                std::size_t max_points) {
  if (!(radius > 0) || !(per_unit > 0) || min_points < 2 || max_points < min_points)
    throw DomainError("invalid energy grid specification");
  double want = std::ceil(2.0 * radius * per_unit) + 1.0;
  auto n = static_cast<std::size_t>(std::clamp(want, static_cast<double>(min_points),
                                               static_cast<double>(max_points)));
  return {-radius, radius, n};
}

double discriminant(double energy, const PeriodicSampler& f, double coupling) {
  // Extended precision first, so D is rounded once; shifted orderings then agree.
  long double a = 1, b = 0, c = 0, d = 1;
  for (double v : f.values()) {
    long double w = static_cast<long double>(energy) - static_cast<long double>(coupling) * v;
    long double na = w * a - c, nb = w * b - d;
    c = a;
    d = b;
    a = na;
    b = nb;
  }
  long double tr = a + d;
  if (std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d) &&
      std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d) < 1e4000L)
    return static_cast<double>(tr);
  auto s = scaled_transfer_product(energy, f, static_cast<std::int64_t>(f.period()), 0, coupling);
  double t = s.m.trace();
  if (s.exp2 > 4096) return t == 0 ? 0.0 : std::copysign(INFINITY, t);
  return std::ldexp(t, static_cast<int>(s.exp2));
}

namespace {

// Beyond this (log of eps * partial-norm^2 ~ 1e-8) D carries too few digits.
constexpr double kIllConditioned = 18.0;

// Number of eigenvalues below x of the Dirichlet block (sites 1..p-1).
std::size_t sturm_count(std::span<const double> v, double x) {
  std::size_t cnt = 0;
  double q = 1.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    q = (v[k] - x) - (k == 1 ? 0.0 : 1.0 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0) ++cnt;
  }
  return cnt;
}

void isolate(std::span<const double> v, double lo, double hi, std::size_t clo, std::size_t chi,
             double width, std::vector<double>& out) {
  if (chi == clo) return;
  double mid = 0.5 * (lo + hi);
  if (hi - lo <= width || mid <= lo || mid >= hi) {
    for (std::size_t k = clo; k < chi; ++k) out.push_back(mid);
    return;
  }
  std::size_t cm = sturm_count(v, mid);
  isolate(v, lo, mid, clo, cm, width, out);
  isolate(v, mid, hi, cm, chi, width, out);
}

std::vector<double> dirichlet_eigenvalues(const PeriodicSampler& f, double radius, double width) {
  std::vector<double> out;
  auto v = f.values();
  if (v.size() < 2) return out;
  out.reserve(v.size() - 1);
  isolate(v, -radius, radius, sturm_count(v, -radius), sturm_count(v, radius), width, out);
  return out;
}

// Zero of D inside [lo, hi]; D has opposite signs at the ends and vanishes
// only inside the single band the interval contains.
double band_center(const PeriodicSampler& f, double lo, double hi, double tol) {
  double dlo = discriminant(lo, f), dhi = discriminant(hi, f);
  if (dlo == 0) return lo;
  if (dhi == 0) return hi;
  if ((dlo < 0) == (dhi < 0)) throw SolverError("discriminant keeps its sign on band interval", lo, hi);
  for (int it = 0; it < 400 && hi - lo > 0.25 * tol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double d = discriminant(mid, f);
    if (d == 0) return mid;
    if ((d < 0) == (dlo < 0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Band edge between gap point `out` and band point `in`: root of |D| - 2.
double band_edge(const PeriodicSampler& f, double out, double in, double tol) {
  auto g = [&](double e) { return std::abs(discriminant(e, f)) - 2.0; };
  if (g(out) <= 0) {
    // The bracket endpoint is a Dirichlet value sitting on an edge. Either it
    // is this band's edge (closed gap) or the gap opens right after it.
    double step = std::copysign(tol, in - out);
    if (std::abs(step) >= std::abs(in - out) || g(out + step) <= 0) return out;
    out += step;
  }
  for (int it = 0; it < 400 && std::abs(in - out) > 0.25 * tol; ++it) {
    double mid = 0.5 * (out + in);
    if (mid == out || mid == in) break;
    if (g(mid) > 0) out = mid;
    else in = mid;
  }
  return 0.5 * (out + in);
}

// Largest log-norm of the partial products A_k(E), k <= p. D(E) is evaluated
// with absolute error of roughly eps * exp(2 * this).
double max_partial_log_norm(double energy, const PeriodicSampler& f) {
  ScaledMatrix s;
  double m = 0;
  for (std::size_t k = 0; k < f.period(); ++k) {
    s = ScaledMatrix{step_matrix(energy, f.values()[k]), 0} * s;
    m = std::max(m, s.log_norm());
  }
  return m;
}

BandSpectrum merge_edges(std::vector<double> edges, std::size_t p, double tol) {
  std::sort(edges.begin(), edges.end());
  BandSpectrum out;
  out.period = p;
  for (std::size_t z = 0; z < p; ++z) {
    Band b{edges[2 * z], edges[2 * z + 1]};
    if (!out.bands.empty() && b.left <= out.bands.back().right + tol) {
      out.bands.back().right = std::max(out.bands.back().right, b.right);
      out.touching = true;
    } else {
      out.bands.push_back(b);
    }
  }
  return out;
}

}  // namespace

BandSpectrum band_spectrum_eigen(const PeriodicSampler& f, double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const auto p = static_cast<Eigen::Index>(f.period());
  auto v = f.values();
  std::vector<double> edges;
  edges.reserve(2 * f.period());
  for (double sign : {1.0, -1.0}) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) h(k, k) = v[static_cast<std::size_t>(k)];
    if (p == 1) {
      h(0, 0) += 2.0 * sign;
    } else {
      for (Eigen::Index k = 0; k + 1 < p; ++k) h(k, k + 1) = h(k + 1, k) = 1.0;
      h(p - 1, 0) += sign;
      h(0, p - 1) += sign;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("periodic eigenproblem did not converge", -INFINITY, INFINITY);
    for (Eigen::Index z = 0; z < p; ++z) edges.push_back(es.eigenvalues()(z));
  }
  return merge_edges(std::move(edges), f.period(), tol);
}

BandSpectrum band_spectrum(const PeriodicSampler& f, double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const std::size_t p = f.period();
  const double radius = f.sup_norm() + 3.0;
  // Each closed gap holds exactly one Dirichlet eigenvalue, so consecutive
  // eigenvalues bracket exactly one band and both of its edges.
  auto mu = dirichlet_eigenvalues(f, radius, 0.25 * tol);
  std::vector<double> cuts;
  cuts.reserve(p + 1);
  cuts.push_back(-radius);
  cuts.insert(cuts.end(), mu.begin(), mu.end());
  cuts.push_back(radius);

  BandSpectrum out;
  out.period = p;
  for (std::size_t z = 0; z < p; ++z) {
    double lo = cuts[z], hi = cuts[z + 1];
    double c;
    Band b;
    try {
      c = band_center(f, lo, hi, tol);
      if (2.0 * max_partial_log_norm(c, f) > kIllConditioned) return band_spectrum_eigen(f, tol);
      b = {band_edge(f, lo, c, tol), band_edge(f, hi, c, tol)};
    } catch (const SolverError&) {
      // D lost its sign structure to rounding; the eigenvalue path does not use D.
      return band_spectrum_eigen(f, tol);
    }
    if (!out.bands.empty() && b.left <= out.bands.back().right + tol) {
      out.bands.back().right = std::max(out.bands.back().right, b.right);
      out.touching = true;
    } else {
      out.bands.push_back(b);
    }
  }
  return out;
}

BandSpectrum floquet_oracle(const PeriodicSampler& f, int theta_count) {
  if (theta_count < 2) throw DomainError("need at least two Floquet phases");
  const auto p = static_cast<Eigen::Index>(f.period());
  auto v = f.values();
  std::vector<double> lo(static_cast<std::size_t>(p), INFINITY), hi(static_cast<std::size_t>(p), -INFINITY);
  for (int t = 0; t < theta_count; ++t) {
    double theta = std::numbers::pi * t / (theta_count - 1);
    std::complex<double> ph = std::polar(1.0, theta);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) h(k, k) = v[static_cast<std::size_t>(k)];
    if (p == 1) {
      h(0, 0) += 2.0 * std::cos(theta);
    } else {
      for (Eigen::Index k = 0; k + 1 < p; ++k) h(k, k + 1) = h(k + 1, k) = 1.0;
      h(p - 1, 0) += ph;
      h(0, p - 1) += std::conj(ph);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw OracleError("eigen-solver did not converge");
    for (Eigen::Index z = 0; z < p; ++z) {
      double e = es.eigenvalues()(z);
      lo[static_cast<std::size_t>(z)] = std::min(lo[static_cast<std::size_t>(z)], e);
      hi[static_cast<std::size_t>(z)] = std::max(hi[static_cast<std::size_t>(z)], e);
    }
  }
  BandSpectrum out;
  out.period = f.period();
  for (std::size_t z = 0; z < lo.size(); ++z) {
    if (!out.bands.empty() && lo[z] <= out.bands.back().right) {
      out.bands.back().right = std::max(out.bands.back().right, hi[z]);
      out.touching = true;
    } else {
      out.bands.push_back({lo[z], hi[z]});
    }
  }
  return out;
}

double lyapunov_periodic(double energy, const PeriodicSampler& f, double coupling) {
  auto s = scaled_transfer_product(energy, f, static_cast<std::int64_t>(f.period()), 0, coupling);
  return log_spectral_radius(s) / static_cast<double>(f.period());
}

double family_lyapunov(double energy, double lambda, std::span<const PeriodicSampler> family) {
  if (family.empty()) throw DomainError("family must be nonempty");
  double s = 0;
  for (const auto& f : family) s += lyapunov_periodic(energy, f, lambda);
  return s / static_cast<double>(family.size());
}

SpectralCertificate measure_certificate(const PeriodicSampler& f, double lambda,
                                        const EnergyGrid& grid, std::uint64_t k, bool check_bands,
                                        std::span<const std::int64_t> offsets) {
  if (k == 0) throw DomainError("block length must be positive");
  std::vector<std::int64_t> all;
  if (offsets.empty()) {
    all.resize(f.period());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<std::int64_t>(j);
    offsets = all;
  }
  SpectralCertificate cert;
  cert.log_growth = INFINITY;
  for (std::size_t i = 0; i < grid.count; ++i) {
    double e = grid.at(i);
    double best = -INFINITY;
    std::int64_t best_off = 0;
    std::uint64_t best_k = k;
    for (auto off : offsets) {
      for (std::uint64_t kk : {k, 2 * k}) {
        double ln = scaled_transfer_product(e, f, static_cast<std::int64_t>(kk), off, lambda).log_norm();
        if (ln > best) best = ln, best_off = off, best_k = kk;
      }
    }
    if (best < cert.log_growth) {
      cert.log_growth = best;
      cert.witness_energy = e;
      cert.witness_offset = best_off;
      cert.witness_block = best_k;
    }
  }
  // Norms of SL(2,R) matrices are >= 1; clamp rounding below zero.
  cert.log_growth = std::max(0.0, cert.log_growth);
  cert.growth = std::exp(cert.log_growth);
  cert.bound = std::exp(std::log(4.0 * std::numbers::pi * static_cast<double>(f.period())) - cert.log_growth);
  if (check_bands) {
    cert.band_measure = band_spectrum(f.scaled(lambda)).total_measure();
    cert.holds = *cert.band_measure <= cert.bound;
  }
  return cert;
}

namespace {

// sup over x in a of dist(x, b)
double directed(const BandSpectrum& a, const BandSpectrum& b) {
  if (a.bands.empty()) return 0;
  if (b.bands.empty()) return INFINITY;
  auto dist = [&](double x) {
    double d = INFINITY;
    for (const auto& iv : b.bands) {
      if (x < iv.left) d = std::min(d, iv.left - x);
      else if (x > iv.right) d = std::min(d, x - iv.right);
      else return 0.0;
    }
    return d;
  };
  double m = 0;
  for (const auto& iv : a.bands) {
    m = std::max({m, dist(iv.left), dist(iv.right)});
    for (std::size_t z = 1; z < b.bands.size(); ++z) {
      double mid = 0.5 * (b.bands[z - 1].right + b.bands[z].left);
      if (mid > iv.left && mid < iv.right) m = std::max(m, dist(mid));
    }
  }
  return m;
}

}  // namespace

double hausdorff_distance(const BandSpectrum& a, const BandSpectrum& b) {
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace lpso
