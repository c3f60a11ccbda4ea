#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "gbn/core.hpp"

namespace gbn {

/// Power of a point set over the integer lattice f in [-fmax, fmax]^dim,
/// divided by N so that white noise has expectation 1 away from DC.
///
/// Storage is flat: lattice point f has index sum_a (f_a + fmax) (2fmax+1)^a,
/// so negating f maps index i to size()-1-i.
struct Periodogram {
  Index dim = 0;
  Index fmax = 0;
  Index n = 0;             ///< points per realization
  Index realizations = 1;  ///< number of sets averaged into power
  Eigen::ArrayXd power;

  Index side() const noexcept { return 2 * fmax + 1; }
  Index size() const noexcept { return power.size(); }
  /// Lattice coordinates of a flat index.
  Eigen::Array<Index, Eigen::Dynamic, 1> frequency(Index flat) const;
  Index flat_index(std::span<const Index> f) const;
  double at(std::span<const Index> f) const { return power(flat_index(f)); }
};

/// ceil(2 n^{1/dim}).
Index default_fmax(Index n, Index dim);

/// Exact periodogram |sum_k exp(-2 pi i f.x_k)|^2 / N. Half of the lattice is
/// evaluated and mirrored, so power(f) == power(-f) holds bit-exactly.
Periodogram periodogram(const PointSetd& points, Index fmax);

/// Mean of several periodograms of the same shape.
Periodogram average(std::span<const Periodogram> items);

struct RadialEntry {
  Index r2 = 0;
  double r = 0;
  double mean_power = 0;
  Index count = 0;
};

struct RadialProfile {
  std::vector<RadialEntry> entries;
  /// noise_floor of this profile, or NaN when the low band is empty.
  double eps_estimate = 0;
};

/// Groups lattice points by exact integer |f|^2 (DC excluded). The whole
/// lattice cube is used unless max_r2 is given.
RadialProfile radial_profile(const Periodogram& p,
                             std::optional<Index> max_r2 = std::nullopt);

struct AnnulusEntry {
  double r_lo = 0;
  double r_hi = 0;
  double mean_power = 0;
  Index count = 0;
};

/// Conventional annulus-averaged profile, bins [k w, (k+1) w) in |f|.
/// Provided to compare against the exact radial reduction.
std::vector<AnnulusEntry> annulus_profile(const Periodogram& p, double width);

struct AnisotropyEntry {
  Index r2 = 0;
  double r = 0;
  double db = 0;        ///< 10 log10(variance / mean^2)
  Index distinct = 0;   ///< values used (one per +-f pair)
};

/// Relative variance of power over each exact ring, in decibels. Since
/// power(f) == power(-f), each +-f pair counts once; rings with a single
/// distinct value have no variance and are skipped.
std::vector<AnisotropyEntry> anisotropy(const Periodogram& p);

/// Baseline of the anisotropy of white noise averaged over R realizations:
/// -10 log10(R).
double anisotropy_baseline(Index realizations);

/// Pooled anisotropy over rings with r_lo <= r <= r_hi, weighting each ring by
/// its degrees of freedom (distinct - 1); returned in dB.
double pooled_anisotropy(const Periodogram& p, double r_lo, double r_hi);

/// Power of the Gaussian-filtered set: power(f) exp(-sigma_rel^2 |omega|^2)
/// with omega = 2 pi f n^{-1/dim}.
Periodogram filtered_power(const Periodogram& p, double sigma_rel);

/// Mean of mean_power over rings with 0 < |f| <= 0.25 n^{1/dim}.
double noise_floor(const RadialProfile& rp, Index n, Index dim);

/// Least squares fit log(mean_power) = log_eps + slope * r2 over rings with
/// r2_lo <= r2 <= r2_hi and positive power.
struct LogFit {
  double log_eps = 0;
  double slope = 0;
  double r_squared = 0;
  Index bins = 0;
};
LogFit fit_log_profile(const RadialProfile& rp, Index r2_lo, Index r2_hi);

/// Smallest pairwise distance on the torus (brute force).
double min_toroidal_distance(const PointSetd& points);

}  // namespace gbn
