#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lpso/sampler.hpp"
#include "lpso/sl2.hpp"

namespace lpso {

struct Band {
  double left = 0, right = 0;
  double length() const { return right - left; }
  bool operator==(const Band&) const = default;
};

struct BandSpectrum {
  std::vector<Band> bands;  // sorted, disjoint
  std::size_t period = 1;
  bool touching = false;  // some closed gap was merged

  double total_measure() const;
  double max_band_length() const;
  double min_gap() const;  // +inf when there is a single band
  bool operator==(const BandSpectrum&) const = default;
};

// Uniform energy grid lo, ..., hi with count >= 2 points.
struct EnergyGrid {
  double lo = -1, hi = 1;
  std::size_t count = 2;

  double at(std::size_t i) const;
  // Symmetric grid [-radius, radius] at the given density, point count clamped.
  static EnergyGrid covering(double radius, double per_unit, std::size_t min_points,
                             std::size_t max_points);
};

// tr of the monodromy; may be +-inf where it overflows a double.
double discriminant(double energy, const PeriodicSampler& f, double coupling = 1.0);

// Bands {|D| <= 2}: each band is bracketed by consecutive Dirichlet eigenvalues
// (exact Sturm counts), then its edges are bisected on |D| - 2. When partial
// transfer products are too large for D to be trusted, or bisection on D
// fails, falls back to band_spectrum_eigen.
BandSpectrum band_spectrum(const PeriodicSampler& f, double tol = 1e-10);

// Edges as eigenvalues of the periodic and antiperiodic p x p Jacobi matrices.
BandSpectrum band_spectrum_eigen(const PeriodicSampler& f, double tol = 1e-10);

// Union over Floquet phases theta in [0, pi] of the eigenvalues of the periodic
// Jacobi matrix, one interval per eigenvalue branch, overlaps merged.
BandSpectrum floquet_oracle(const PeriodicSampler& f, int theta_count);

double lyapunov_periodic(double energy, const PeriodicSampler& f, double coupling = 1.0);
double family_lyapunov(double energy, double lambda, std::span<const PeriodicSampler> family);

struct SpectralCertificate {
  double log_growth = 0;  // log C
  double growth = 1;      // C, possibly +inf
  double bound = 0;       // 4 pi p / C
  double witness_energy = 0;
  std::int64_t witness_offset = 0;
  std::uint64_t witness_block = 0;
  std::optional<double> band_measure;  // set when the band solver was run
  bool holds = true;                    // band_measure <= bound (true if unchecked)
};

// C = min over grid energies of max over offsets and over block lengths {k, 2k}
// of ||A_k(E)||, for the coupled sequence lambda*f. Offsets default to 0..p-1.
SpectralCertificate measure_certificate(const PeriodicSampler& f, double lambda,
                                        const EnergyGrid& grid, std::uint64_t k,
                                        bool check_bands = true,
                                        std::span<const std::int64_t> offsets = {});

// Hausdorff distance between two finite unions of closed intervals.
double hausdorff_distance(const BandSpectrum& a, const BandSpectrum& b);

}  // namespace lpso
