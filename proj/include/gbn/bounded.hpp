#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gbn/core.hpp"
#include "gbn/descent.hpp"
#include "gbn/pairwise.hpp"

namespace gbn {

/// Interior-ward attraction of the unit box on a point at x, sigma being the
/// filter width (not the energy variance). Component r:
///   prod_{m != r} [erf((1-x_m)/2s) + erf(x_m/2s)]
///     * [exp(-(x_r/2s)^2) - exp(-((1-x_r)/2s)^2)]
/// This is minus the closed-form box integral of exp(-|y-x|^2/4s^2) (y - x)
/// divided by 2 s^2 (sqrt(pi) s)^{d-1}, i.e. it points away from near faces.
template <typename Derived>
Vector<typename Derived::Scalar> domain_gradient(const Eigen::MatrixBase<Derived>& x,
                                                 typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  if (!(sigma > 0)) throw std::invalid_argument("domain_gradient: sigma must be > 0");
  const Index d = x.size();
  const Scalar k = 1 / (2 * sigma);
  Vector<Scalar> band(d), edge(d);
  for (Index m = 0; m < d; ++m) {
    band(m) = std::erf((1 - x(m)) * k) + std::erf(x(m) * k);
    const Scalar lo = x(m) * k, hi = (1 - x(m)) * k;
    edge(m) = std::exp(-lo * lo) - std::exp(-hi * hi);
  }
  Vector<Scalar> g(d);
  for (Index r = 0; r < d; ++r) {
    Scalar p = edge(r);
    for (Index m = 0; m < d; ++m)
      if (m != r) p *= band(m);
    g(r) = p;
  }
  return g;
}

/// Box overlap of one filter kernel: integral over [0,1]^d of
/// exp(-|y-x|^2 / 4 sigma^2) dy.
template <typename Derived>
typename Derived::Scalar domain_overlap(const Eigen::MatrixBase<Derived>& x,
                                        typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  const Scalar k = 1 / (2 * sigma);
  const Scalar w = std::sqrt(std::numbers::pi_v<Scalar>) * sigma;
  Scalar p = 1;
  for (Index m = 0; m < x.size(); ++m)
    p *= w * (std::erf((1 - x(m)) * k) + std::erf(x(m) * k));
  return p;
}

namespace detail {

/// Point repulsion plus attraction to a continuum of density balance * N
/// filling the box:
///   E = sum_{k<l} e_kl - balance N sum_k overlap(x_k)
/// The continuum is the complement of fictitious outside points at the same
/// density, so balance = 1 makes a flat interior force-free.
template <typename Scalar>
struct BoundedProblem {
  PairOptions<Scalar> opt;
  Scalar sigma = 0;
  Scalar balance = 1;

  StepEval<Scalar> evaluate(const Matrix<Scalar>& x) {
    const Index d = x.rows();
    const Index n = x.cols();
    StepEval<Scalar> ev;
    if (n >= 2) {
      auto s = pair_sums(x, opt);
      ev.direction = std::move(s.direction);
      ev.mass = std::move(s.mass);
      ev.energy = s.energy;
    } else {
      ev.direction = Matrix<Scalar>::Zero(d, n);
      ev.mass = Vector<Scalar>::Zero(n);
    }
    const Scalar rho = balance * static_cast<Scalar>(n);
    const Scalar gscale = rho * opt.energy_var *
                          std::pow(std::sqrt(std::numbers::pi_v<Scalar>) * sigma,
                                   static_cast<Scalar>(d - 1));
    Scalar attract = 0;
    for (Index i = 0; i < n; ++i) {
      const Scalar ov = rho * domain_overlap(x.col(i), sigma);
      attract += ov;
      ev.direction.col(i) += gscale * domain_gradient(x.col(i), sigma);
      ev.mass(i) = std::max(ev.mass(i), ov);
    }
    ev.energy -= attract;
    return ev;
  }
  void save() {}
  void restore() {}
};

template <typename Scalar>
BoundedProblem<Scalar> bounded_problem(const KernelConfig<Scalar>& cfg, Scalar balance) {
  if (!(balance > 0)) throw std::invalid_argument("bounded: balance must be > 0");
  BoundedProblem<Scalar> p;
  p.opt.geometry = PairGeometry::plain;
  p.opt.energy_var = cfg.energy_var;
  p.opt.periods = 1;
  p.sigma = cfg.sigma_abs;
  p.balance = balance;
  return p;
}

}  // namespace detail

/// Energy minimized by optimize_bounded (pair sum minus continuum overlap).
template <typename Scalar>
Scalar bounded_energy(const PointSet<Scalar>& points, const KernelConfig<Scalar>& cfg,
                      Scalar balance = 1) {
  return detail::bounded_problem(cfg, balance).evaluate(points.coords()).energy;
}

/// -energy_var times the gradient of bounded_energy, one column per point.
template <typename Scalar>
Matrix<Scalar> bounded_direction(const PointSet<Scalar>& points,
                                 const KernelConfig<Scalar>& cfg, Scalar balance = 1) {
  return detail::bounded_problem(cfg, balance).evaluate(points.coords()).direction;
}

/// Gaussian blue noise in the closed unit box: free-space pair repulsion
/// against attraction to the box itself. balance scales the continuum
/// density relative to N.
template <typename Scalar>
std::pair<PointSet<Scalar>, OptimizeTrace> optimize_bounded(
    const PointSet<Scalar>& points, const KernelConfig<Scalar>& kcfg,
    const OptimizeConfig& ocfg, Scalar balance = 1) {
  if (points.domain() != Domain::bounded)
    throw std::invalid_argument("optimize_bounded: bounded point set required");
  auto problem = detail::bounded_problem(kcfg, balance);
  auto [x, trace] = descend(points.coords(), Domain::bounded, ocfg, problem);
  return {PointSet<Scalar>(std::move(x), Domain::bounded), std::move(trace)};
}

/// Distance of every point to its nearest face of the unit box.
template <typename Scalar>
Vector<Scalar> face_offsets(const PointSet<Scalar>& points) {
  Vector<Scalar> out(points.size());
  for (Index k = 0; k < points.size(); ++k) {
    Scalar m = 1;
    for (Index a = 0; a < points.dim(); ++a)
      m = std::min({m, points(a, k), 1 - points(a, k)});
    out(k) = m;
  }
  return out;
}

}  // namespace gbn
