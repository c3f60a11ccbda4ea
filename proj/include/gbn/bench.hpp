#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gbn/core.hpp"

namespace gbn {

enum class IntegrandKind { gaussian_sum, halfspace };
enum class Sampler { gbn, random, stratified };

const char* to_string(IntegrandKind k);
const char* to_string(Sampler s);
IntegrandKind parse_integrand(const std::string& s);
Sampler parse_sampler(const std::string& s);

/// One benchmark integrand on the unit box.
///
/// gaussian_sum: f(x) = sum_c prod_a sum_k exp(-(x_a - c_a - k)^2 / 2 sigma'^2)
/// over 64 random centers, sigma' = 512^{-1/dim}.
/// halfspace: indicator of normal . (x - anchor) <= 0.
struct IntegrandSpec {
  IntegrandKind kind = IntegrandKind::gaussian_sum;
  Index dim = 0;
  Matrix<double> centers;  // dim x 64, gaussian_sum only
  double sigma_prime = 0;
  int periods = 1;
  Vector<double> anchor, normal;  // halfspace only
  double exact_integral = 0;

  double operator()(const Eigen::Ref<const Vector<double>>& x) const;
};

IntegrandSpec make_gaussian_sum(Index dim, Seed seed);
IntegrandSpec make_halfspace(Index dim, Seed seed);

/// Halfspace with a given anchor and normal; zero normal throws.
IntegrandSpec halfspace(const Vector<double>& anchor, const Vector<double>& normal);

/// Volume of {x in [0,1]^d : normal . (x - anchor) <= 0}.
double halfspace_volume(const Vector<double>& anchor, const Vector<double>& normal);

/// Plain Monte Carlo estimate (1/N) sum f(x_k).
double estimate(const IntegrandSpec& spec, const PointSetd& points);

struct VarianceRow {
  Index n = 0;
  double variance = 0;
  Index instances = 0;
  Index randomizations = 0;
};

struct VarianceReport {
  Sampler sampler = Sampler::random;
  IntegrandKind family = IntegrandKind::gaussian_sum;
  Index dim = 0;
  /// "shift" for gbn (one optimized set per N, random toroidal shifts),
  /// "fresh" for the others (a new set per randomization).
  std::string randomization;
  std::vector<VarianceRow> rows;
};

struct SweepOptions {
  /// Directory for optimized GBN sets, one point file per (N, dim, sigma,
  /// seed, iterations). Empty disables caching.
  std::string cache_dir;
  int gbn_iterations = 10000;
  double gbn_sigma_rel = 0.7;
};

/// GBN set used by the sweep, loaded from the cache when present.
PointSetd cached_gbn_set(Index n, Index dim, Seed seed, const SweepOptions& opt);

/// Mean squared error of estimate() against exact_integral over
/// instances x randomizations, for every N. Instance i uses integrand seed
/// derived from (seed, i); results are reduced in index order.
VarianceReport variance_sweep(Sampler sampler, IntegrandKind family, Index dim,
                              const std::vector<Index>& ns, Index instances,
                              Index randomizations, Seed seed, const SweepOptions& opt = {});

/// CSV with header `sampler,family,dim,N,variance,instances,randomizations`.
void write_csv(std::ostream& out, const std::vector<VarianceReport>& reports);

}  // namespace gbn
