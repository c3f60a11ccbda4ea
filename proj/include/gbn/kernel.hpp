#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gbn/core.hpp"

namespace gbn {

/// One axis of the toroidal Gaussian energy kernel.
///   value = sum_k exp(-(x-k)^2 / (2 s2))
///   slope = sum_k (x-k) exp(-(x-k)^2 / (2 s2))
/// so that d(value)/dx = -slope / s2.
template <typename Scalar>
struct AxisKernelEval {
  Scalar value = 0;
  Scalar slope = 0;
};

/// Direct replica sum over k in [1 - periods, periods].
template <typename Scalar>
AxisKernelEval<Scalar> axis_replica_eval(Scalar x, Scalar s2, int periods) {
  AxisKernelEval<Scalar> r;
  const Scalar c = Scalar(-0.5) / s2;
  for (int k = 1 - periods; k <= periods; ++k) {
    const Scalar t = x - Scalar(k);
    const Scalar e = std::exp(t * t * c);
    r.value += e;
    r.slope += t * e;
  }
  return r;
}

/// Harmonic (Jacobi theta) form of the same kernel, truncated at fmax:
///   value = sqrt(2 pi s2) (1 + 2 sum_{f=1}^{fmax} q^{f^2} cos(2 pi x f)),
///   q = exp(-2 pi^2 s2),
/// slope = -s2 d(value)/dx, matching axis_replica_eval.
template <typename Scalar>
AxisKernelEval<Scalar> axis_theta_eval(Scalar x, Scalar s2, int fmax) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar series = 1;
  Scalar dseries = 0;  // d(series)/dx
  for (int f = 1; f <= fmax; ++f) {
    const Scalar ff = static_cast<Scalar>(f);
    const Scalar w = std::exp(-2 * pi * pi * s2 * ff * ff);
    if (w == Scalar(0)) break;
    series += 2 * w * std::cos(2 * pi * x * ff);
    dseries -= 4 * pi * ff * w * std::sin(2 * pi * x * ff);
  }
  const Scalar pre = std::sqrt(2 * pi * s2);
  return {pre * series, -s2 * pre * dseries};
}

namespace detail {

template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& pi, const Eigen::MatrixBase<B>& pj) {
  if (pi.size() != pj.size() || pi.size() < 1)
    throw std::invalid_argument("pair kernel: dimension mismatch");
}

}  // namespace detail

/// Separable toroidal Gaussian energy between two points: the product over
/// axes of axis_replica_eval at the wrapped difference.
template <typename A, typename B, typename Scalar>
Scalar pair_energy(const Eigen::MatrixBase<A>& pi, const Eigen::MatrixBase<B>& pj,
                   const KernelConfig<Scalar>& cfg) {
  detail::check_pair(pi, pj);
  Scalar e = 1;
  for (Index a = 0; a < pi.size(); ++a) {
    const Scalar x = toroidal_wrap(Scalar(pi(a) - pj(a)));
    e *= axis_replica_eval(x, cfg.energy_var, cfg.periods).value;
  }
  return e;
}

/// Slope products: component r is slope_r * prod_{m != r} value_m.
///
/// This is -energy_var times the gradient of pair_energy with respect to pi,
/// i.e. a descent direction for pi without the optimizer's scale factors.
template <typename A, typename B, typename Scalar>
Vector<Scalar> pair_gradient(const Eigen::MatrixBase<A>& pi,
                             const Eigen::MatrixBase<B>& pj,
                             const KernelConfig<Scalar>& cfg) {
  detail::check_pair(pi, pj);
  const Index d = pi.size();
  Vector<Scalar> value(d), slope(d);
  for (Index a = 0; a < d; ++a) {
    const Scalar x = toroidal_wrap(Scalar(pi(a) - pj(a)));
    const auto ev = axis_replica_eval(x, cfg.energy_var, cfg.periods);
    value(a) = ev.value;
    slope(a) = ev.slope;
  }
  Vector<Scalar> g(d);
  for (Index r = 0; r < d; ++r) {
    Scalar p = slope(r);
    for (Index m = 0; m < d; ++m)
      if (m != r) p *= value(m);
    g(r) = p;
  }
  return g;
}

/// |g^|^2 of the filter in normalized frequency units:
/// exp(-sigma_rel^2 |omega|^2), omega = 2 pi f n^{-1/d}.
inline double freq_weight(double omega_norm_sq, double sigma_rel) {
  return std::exp(-sigma_rel * sigma_rel * omega_norm_sq);
}

/// Idealized spectrum eps * exp(sigma_rel^2 |omega|^2); sigma_rel = 1 is the
/// reference blue-noise profile.
inline double reference_profile(double eps, double omega_norm_sq,
                                double sigma_rel = 1.0) {
  if (!(eps > 0)) throw std::invalid_argument("reference_profile: eps must be > 0");
  return eps * std::exp(sigma_rel * sigma_rel * omega_norm_sq);
}

}  // namespace gbn
