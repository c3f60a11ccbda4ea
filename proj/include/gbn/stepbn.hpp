#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbn/core.hpp"
#include "gbn/descent.hpp"
#include "gbn/kernel.hpp"

namespace gbn {

namespace detail {

/// Highest harmonic whose weight exp(-2 pi^2 s2 f^2) is still above machine
/// epsilon, capped at fmax_cut.
template <typename Scalar>
int effective_cut(Scalar s2, int fmax_cut) {
  if (fmax_cut < 1) throw std::invalid_argument("stepbn: fmax_cut must be >= 1");
  if (!(s2 > 0)) throw std::invalid_argument("stepbn: s2 must be > 0");
  const Scalar lim = -std::log(std::numeric_limits<Scalar>::epsilon()) /
                     (2 * std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar> * s2);
  const Scalar f = std::floor(std::sqrt(lim));
  return f < Scalar(fmax_cut) ? std::max(1, static_cast<int>(f)) : fmax_cut;
}

}  // namespace detail

/// Truncated harmonic series of the axis kernel,
///   T(x) = 1 + 2 sum_{f=1}^{F} exp(-2 pi^2 s2 f^2) cos(2 pi f x),
/// and its derivative dT/dx.
template <typename Scalar>
AxisKernelEval<Scalar> truncated_axis(Scalar x, Scalar s2, int fmax_cut) {
  const int F = detail::effective_cut(s2, fmax_cut);
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  Scalar v = 1, dv = 0;
  for (int f = 1; f <= F; ++f) {
    const Scalar q = std::exp(-two_pi * std::numbers::pi_v<Scalar> * s2 * Scalar(f * f));
    v += 2 * q * std::cos(two_pi * f * x);
    dv -= 2 * q * two_pi * f * std::sin(two_pi * f * x);
  }
  return {v, dv};
}

template <typename Scalar>
struct TruncatedTerms {
  Scalar energy = 0;
  Vector<Scalar> gradient;
};

/// Product of truncated axis series at the per-axis deltas xij, with its
/// gradient with respect to xij.
template <typename Derived>
TruncatedTerms<typename Derived::Scalar> truncated_pair_terms(
    const Eigen::MatrixBase<Derived>& xij, typename Derived::Scalar s2, int fmax_cut) {
  using Scalar = typename Derived::Scalar;
  const Index d = xij.size();
  std::vector<AxisKernelEval<Scalar>> ax(static_cast<std::size_t>(d));
  for (Index a = 0; a < d; ++a) ax[a] = truncated_axis(Scalar(xij(a)), s2, fmax_cut);
  TruncatedTerms<Scalar> out;
  out.energy = 1;
  out.gradient = Vector<Scalar>::Ones(d);
  for (Index a = 0; a < d; ++a) {
    out.energy *= ax[a].value;
    for (Index r = 0; r < d; ++r) out.gradient(r) *= r == a ? ax[a].slope : ax[a].value;
  }
  return out;
}

/// Truncated pair energy of a whole set, E = sum_{i<j} prod_a T(x_i - x_j),
/// evaluated through its Fourier form: with S(f) = sum_k exp(2 pi i f.x_k)
/// and w(f) = prod_a exp(-2 pi^2 s2 f_a^2),
///   E = sum_{f in half cube} w(f) |S(f)|^2 + (N^2 - N sum_{cube} w) / 2.
template <typename Scalar>
class StepEnergy {
 public:
  StepEnergy(Index dim, Scalar s2, int fmax_cut) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("StepEnergy: dim must be >= 1");
    F_ = detail::effective_cut(s2, fmax_cut);
    const Index side = 2 * F_ + 1;
    Index cube = 1;
    for (Index a = 0; a < dim; ++a) {
      if (cube > (Index(1) << 24) / side)
        throw std::invalid_argument("StepEnergy: frequency cube too large");
      cube *= side;
    }
    const Scalar pi = std::numbers::pi_v<Scalar>;
    std::vector<Scalar> q(static_cast<std::size_t>(F_) + 1);
    for (int f = 0; f <= F_; ++f) q[f] = std::exp(-2 * pi * pi * s2 * Scalar(f * f));
    total_weight_ = 0;
    curvature_ = 0;
    std::vector<int> f(static_cast<std::size_t>(dim));
    for (Index c = 0; c < cube; ++c) {
      Index code = c;
      Scalar w = 1, r2 = 0;
      int lead = 0;  // first nonzero coordinate
      for (Index a = 0; a < dim; ++a) {
        f[a] = static_cast<int>(code % side) - F_;
        code /= side;
        w *= q[std::abs(f[a])];
        r2 += Scalar(f[a]) * Scalar(f[a]);
        if (lead == 0) lead = f[a];
      }
      total_weight_ += w;
      curvature_ += w * 4 * pi * pi * r2;
      if (lead > 0) {
        freqs_.insert(freqs_.end(), f.begin(), f.end());
        weights_.push_back(w);
      }
    }
    curvature_ /= Scalar(dim);
  }

  Index frequency_count() const noexcept { return static_cast<Index>(weights_.size()); }
  int cut() const noexcept { return F_; }
  /// Mean diagonal curvature of E per coordinate near a suppressed spectrum.
  Scalar curvature() const noexcept { return curvature_; }

  /// Energy and, if grad is non-null, dE/dx (dim x n).
  Scalar evaluate(const Matrix<Scalar>& x, Matrix<Scalar>* grad) const {
    using C = std::complex<Scalar>;
    const Index n = x.cols();
    const Index m = frequency_count();
    const Index side = 2 * F_ + 1;
    const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    // axis tables exp(2 pi i f x) for f in [-F, F]
    std::vector<Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>> tab(
        static_cast<std::size_t>(dim_));
    for (Index a = 0; a < dim_; ++a) {
      tab[a].resize(n, side);
      for (Index k = 0; k < n; ++k)
        for (int f = -F_; f <= F_; ++f) {
          const Scalar t = Scalar(f) * x(a, k);
          tab[a](k, f + F_) = std::polar(Scalar(1), two_pi * (t - std::round(t)));
        }
    }
    Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> phase(n, m);
    Eigen::Matrix<C, Eigen::Dynamic, 1> s(m);
    Scalar e = 0;
#pragma omp parallel for schedule(static) reduction(+ : e)
    for (Index j = 0; j < m; ++j) {
      const int* f = freqs_.data() + j * dim_;
      auto col = phase.col(j);
      col = tab[0].col(f[0] + F_);
      for (Index a = 1; a < dim_; ++a) col.array() *= tab[a].col(f[a] + F_).array();
      s(j) = col.sum();
      e += weights_[j] * std::norm(s(j));
    }
    const Scalar nn = static_cast<Scalar>(n);
    e += (nn * nn - nn * total_weight_) / 2;
    if (grad) {
      grad->resize(dim_, n);
      Eigen::Matrix<C, Eigen::Dynamic, 1> c(m);
      for (Index a = 0; a < dim_; ++a) {
        for (Index j = 0; j < m; ++j)
          c(j) = weights_[j] * Scalar(freqs_[j * dim_ + a]) * std::conj(s(j));
        const Eigen::Matrix<C, Eigen::Dynamic, 1> t = phase * c;
        // both halves of the cube contribute equally
        grad->row(a) = (-2 * two_pi) * t.imag().transpose();
      }
    }
    return e;
  }

 private:
  Index dim_;
  int F_ = 1;
  std::vector<int> freqs_;
  std::vector<Scalar> weights_;
  Scalar total_weight_ = 0;
  Scalar curvature_ = 0;
};

namespace detail {

template <typename Scalar>
struct StepProblem {
  const StepEnergy<Scalar>* energy;
  StepEval<Scalar> evaluate(const Matrix<Scalar>& x) {
    StepEval<Scalar> ev;
    Matrix<Scalar> g;
    ev.energy = energy->evaluate(x, &g);
    ev.direction = -g;
    ev.mass = Vector<Scalar>::Constant(x.cols(), energy->curvature());
    return ev;
  }
  void save() {}
  void restore() {}
};

}  // namespace detail

/// Kernel width of the truncated energy in units of the nominal spacing;
/// its variance is s2 = 2 (sigma_rel n^{-1/d})^2 as for the untruncated kernel.
struct StepOptions {
  double sigma_rel = 0.5;
};

/// Default stepping for step blue noise: 1D runs take a quarter step, since
/// the 1D energy falls quickly toward the regular grid.
inline OptimizeConfig step_default_config(Index dim) {
  OptimizeConfig c;
  if (dim == 1) c.step_scale = 0.25;
  return c;
}

/// Points whose spectrum is suppressed inside the frequency cube |f_a| <= fmax_cut.
/// The step of point k is lambda (-dE/dx_k) / curvature.
template <typename Scalar>
std::pair<PointSet<Scalar>, OptimizeTrace> optimize_step(const PointSet<Scalar>& points,
                                                         int fmax_cut,
                                                         const OptimizeConfig& ocfg,
                                                         const StepOptions& sopt = {}) {
  if (points.domain() != Domain::toroidal)
    throw std::invalid_argument("optimize_step: toroidal point set required");
  if (fmax_cut < 1) throw std::invalid_argument("optimize_step: fmax_cut must be >= 1");
  if (points.size() < 2) return {points, OptimizeTrace{}};
  const auto kc = KernelConfig<Scalar>::make(static_cast<Scalar>(sopt.sigma_rel),
                                             points.size(), points.dim());
  const StepEnergy<Scalar> energy(points.dim(), kc.energy_var, fmax_cut);
  detail::StepProblem<Scalar> problem{&energy};
  auto [x, trace] = descend(points.coords(), Domain::toroidal, ocfg, problem);
  return {PointSet<Scalar>(std::move(x), Domain::toroidal), std::move(trace)};
}

}  // namespace gbn
