#pragma once

#include <Eigen/Dense>

#include <optional>
#include <tuple>

#include "gbn/core.hpp"
#include "gbn/descent.hpp"

namespace gbn {

/// Harmonic-mean coupling of two kernel shapes.
inline double mutual_shape(double ak, double al) { return 2 * ak * al / (ak + al); }

/// Per-point amplitude/width factors of the normalized kernels
/// a exp(-a |x - x_k|^2 / 2 sigma^2). Normalized so that mean(a^2) = 1.
struct ShapeFactors {
  Eigen::VectorXd a;
};

/// Rescales a so that its squares average to one.
void normalize_shapes(ShapeFactors& s);

/// Shape fitting by accumulated density: each pass sets
///   a_k = sum_{l != k} a_l exp(-a_l |x_k - x_l|^2 / 2 sigma^2)
/// and renormalizes. Starts from a = 1 unless init is given. Distances use the
/// nearest toroidal image (or plain distances for bounded sets).
ShapeFactors shape_factors(const PointSetd& points, double sigma, int iterations,
                           const ShapeFactors* init = nullptr);

/// Negative pixel kernels standing for the target density. Pixel p carries
/// amplitude b_p = n rho_p / sum(rho), so the pixels hold as much kernel mass
/// as the n points, and shape a_p = kappa rho_p with kappa chosen so that
/// points distributed like rho have mean a^2 = 1. Zero pixels carry no weight.
/// Arrays are row-major, index row * width + col; pixel centres sit at
/// ((col + 0.5) / W, (row + 0.5) / H).
struct PixelField {
  Eigen::VectorXd amplitude;
  Eigen::VectorXd shape;
  Index width = 0, height = 0;

  static PixelField make(const DensityMap& density, Index n);
};

/// Everything the adaptive energy depends on. kcfg.energy_var is the
/// variance of the unshaped pair kernel; kcfg.sigma_abs is the width used for
/// shape fitting and reconstruction.
struct AdaptiveState {
  PointSetd points;
  ShapeFactors shapes;
  std::optional<DensityMap> density;
  KernelConfigd kcfg;
};

/// Point-point variance term without its constants,
///   (pi energy_var / N) sum_{k<l} a_kl exp(-a_kl |x_k - x_l|^2 / 2 energy_var)
/// with a_kl = mutual_shape(a_k, a_l). Equals bn_energy when a = 1.
double adaptive_energy(const AdaptiveState& s);

/// Gradient of adaptive_energy with the shapes held fixed:
///   -(pi / N) sum_{l != k} a_kl^2 exp(-a_kl |x_k - x_l|^2 / 2 energy_var) (x_k - x_l)
Eigen::MatrixXd adaptive_gradient(const AdaptiveState& s);

/// Cross term between points and negative pixel kernels,
///   -(pi energy_var / N) sum_k sum_p b_p a_kp exp(-a_kp |x_k - c_p|^2 / 2 energy_var),
/// restricted to pixels within 9 energy standard deviations (scaled by
/// a_k^{-1/2}) of each point.
double pixel_energy(const AdaptiveState& s, const PixelField& field);

/// Minus the gradient of pixel_energy for point k: the pull toward dense pixels.
Eigen::VectorXd pixel_attraction(const AdaptiveState& s, const PixelField& field, Index k);

/// Density-adaptive blue noise. Starts from weighted_random_init(density, n,
/// ocfg.seed) with a = 1; every iteration runs one shape pass, then one
/// normalized step on point repulsion plus pixel attraction.
std::tuple<PointSetd, ShapeFactors, OptimizeTrace> optimize_adaptive(
    const DensityMap& density, Index n, const KernelConfigd& kcfg,
    const OptimizeConfig& ocfg);

/// Rasterizes A(x) = sum_k a_k exp(-a_k |x - x_k|^2 / 2 sigma_abs^2) at pixel
/// centres (row r covers y in [r/H, (r+1)/H)). The result is scaled to mean
/// target_mean if given, else to a maximum of 1.
Eigen::ArrayXXd reconstruct(const PointSetd& points, const ShapeFactors& shapes,
                            const KernelConfigd& kcfg, Index width, Index height,
                            std::optional<double> target_mean = std::nullopt);

/// Toroidal Gaussian blur exp(-r^2 / 2 sigma^2) of a density image, sigma in
/// unit-square coordinates; the reference for reconstruction error.
Eigen::ArrayXXd blur(const Eigen::ArrayXXd& image, double sigma);

}  // namespace gbn
