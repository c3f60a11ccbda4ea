#pragma once

#include <numbers>
#include <stdexcept>
#include <utility>

#include "gbn/core.hpp"
#include "gbn/descent.hpp"
#include "gbn/pairwise.hpp"

namespace gbn {

namespace detail {

template <typename Scalar>
PairOptions<Scalar> toroidal_pair_options(const KernelConfig<Scalar>& cfg) {
  PairOptions<Scalar> opt;
  opt.geometry = PairGeometry::toroidal;
  opt.energy_var = cfg.energy_var;
  opt.periods = cfg.periods;
  if (cfg.truncate_sigmas) opt.cutoff = *cfg.truncate_sigmas * cfg.sigma_abs;
  return opt;
}

template <typename Scalar>
void require_toroidal(const PointSet<Scalar>& p, const char* who) {
  if (p.domain() != Domain::toroidal)
    throw std::invalid_argument(std::string(who) + ": toroidal point set required");
}

template <typename Scalar>
struct UniformProblem {
  PairOptions<Scalar> opt;
  StepEval<Scalar> evaluate(const Matrix<Scalar>& x) {
    auto s = pair_sums(x, opt);
    return {std::move(s.direction), std::move(s.mass), s.energy};
  }
  void save() {}
  void restore() {}
};

}  // namespace detail

/// Filtered-set variance without its constant:
///   (pi sigma_abs^2 / N) sum_k sum_{l != k} exp(-|x_k - x_l|^2 / (4 sigma_abs^2))
/// with toroidal replicas.
template <typename Scalar>
Scalar bn_energy(const PointSet<Scalar>& points, const KernelConfig<Scalar>& cfg) {
  detail::require_toroidal(points, "bn_energy");
  if (points.size() < 2) return Scalar(0);
  const auto s = pair_sums(points.coords(), detail::toroidal_pair_options(cfg));
  return std::numbers::pi_v<Scalar> * cfg.energy_var /
         static_cast<Scalar>(points.size()) * s.energy;
}

/// Gradient of bn_energy, one column per point: -(pi/N) sum_l pair_gradient.
template <typename Scalar>
Matrix<Scalar> bn_gradient(const PointSet<Scalar>& points,
                           const KernelConfig<Scalar>& cfg) {
  detail::require_toroidal(points, "bn_gradient");
  if (points.size() < 2) return Matrix<Scalar>::Zero(points.dim(), points.size());
  auto s = pair_sums(points.coords(), detail::toroidal_pair_options(cfg));
  return (-std::numbers::pi_v<Scalar> / static_cast<Scalar>(points.size())) *
         s.direction;
}

/// Gaussian blue noise on the unit torus. Trace energies are bn_energy values
/// up to the constant factor pi energy_var / N.
template <typename Scalar>
std::pair<PointSet<Scalar>, OptimizeTrace> optimize_uniform(
    const PointSet<Scalar>& points, const KernelConfig<Scalar>& kcfg,
    const OptimizeConfig& ocfg) {
  detail::require_toroidal(points, "optimize_uniform");
  if (points.size() < 2) return {points, OptimizeTrace{}};
  detail::UniformProblem<Scalar> problem{detail::toroidal_pair_options(kcfg)};
  auto [x, trace] = descend(points.coords(), Domain::toroidal, ocfg, problem);
  return {PointSet<Scalar>(std::move(x), Domain::toroidal), std::move(trace)};
}

}  // namespace gbn
