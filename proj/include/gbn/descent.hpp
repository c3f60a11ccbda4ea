#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbn/core.hpp"

namespace gbn {

struct OptimizeConfig {
  Index iterations = 10000;
  /// lambda of the normalized step dx_i = lambda * D_i / M_i.
  double step_scale = 1.0;
  /// Per-point step clamp; empty means 0.5 n^{-1/d}.
  std::optional<double> max_move;
  Index energy_check_every = 100;
  Seed seed{};
  /// The run stops early once lambda has been halved this many times.
  int max_halvings = 30;
};

struct TraceRecord {
  Index iteration = 0;
  double energy = 0;
  double max_displacement = 0;
  double step_scale = 0;
};

struct OptimizeTrace {
  std::vector<TraceRecord> records;
  int halvings = 0;
};

/// One evaluation of the objective at a snapshot of all positions.
/// The step of point i is direction(:,i) / mass(i); energy is any quantity
/// that the step decreases for small lambda.
template <typename Scalar>
struct StepEval {
  Matrix<Scalar> direction;
  Vector<Scalar> mass;
  Scalar energy = 0;
};

namespace detail {

/// Separates exactly coincident points, which are a symmetric deadlock of the
/// pair gradient. Only called once on the starting set.
template <typename Scalar>
void jitter_coincident(Matrix<Scalar>& x, Domain domain, Seed seed) {
  const Index d = x.rows();
  const Index n = x.cols();
  const Scalar h = std::pow(Scalar(n), Scalar(-1) / Scalar(d));
  const Scalar tol2 = Scalar(1e-12) * h * Scalar(1e-12) * h;
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      Scalar r2 = 0;
      for (Index a = 0; a < d; ++a) {
        Scalar u = std::abs(x(a, i) - x(a, j));
        if (domain == Domain::toroidal) u = std::min(u, 1 - u);
        r2 += u * u;
      }
      if (r2 >= tol2) continue;
      Rng rng(seed, 0x6a1773ULL + static_cast<std::uint64_t>(j));
      for (Index a = 0; a < d; ++a) {
        Scalar v = x(a, j) + Scalar(1e-9) * h * static_cast<Scalar>(rng.normal());
        x(a, j) = domain == Domain::toroidal ? toroidal_wrap(v)
                                             : std::clamp(v, Scalar(0), Scalar(1));
      }
      break;
    }
  }
}

template <typename Scalar>
Scalar apply_step(Matrix<Scalar>& x, const StepEval<Scalar>& ev, Domain domain,
                  Scalar lambda, Scalar max_move) {
  Scalar worst = 0;
  for (Index i = 0; i < x.cols(); ++i) {
    const Scalar m = ev.mass(i);
    if (!(m > 0)) continue;
    Vector<Scalar> dx = (lambda / m) * ev.direction.col(i);
    Scalar len = dx.norm();
    if (!std::isfinite(len)) continue;
    if (len > max_move) {
      dx *= max_move / len;
      len = max_move;
    }
    worst = std::max(worst, len);
    for (Index a = 0; a < x.rows(); ++a) {
      const Scalar v = x(a, i) + dx(a);
      x(a, i) = domain == Domain::toroidal ? toroidal_wrap(v)
                                           : std::clamp(v, Scalar(0), Scalar(1));
    }
  }
  return worst;
}

}  // namespace detail

/// Jacobi-style normalized descent shared by all optimizers.
///
/// Problem must provide
///   StepEval<Scalar> evaluate(const Matrix<Scalar>&)
///   void save(); void restore();   // auxiliary state (e.g. shapes)
/// and may provide
///   Scalar energy_at(const Matrix<Scalar>&)   // energy under the current state
/// in which case the last checkpoint is rescored with it before comparing, so
/// drift in the auxiliary state is not mistaken for an energy rise.
///
/// Every energy_check_every iterations the energy is compared with the last
/// accepted checkpoint. If it rose, the block is undone and retried with half
/// the step scale, so the accepted energies never increase (relative to the rescored checkpoint when energy_at is provided).
template <typename Scalar, typename Problem>
std::pair<Matrix<Scalar>, OptimizeTrace> descend(Matrix<Scalar> x, Domain domain,
                                                 const OptimizeConfig& cfg,
                                                 Problem& problem) {
  if (cfg.iterations < 0 || cfg.energy_check_every < 1 || !(cfg.step_scale > 0))
    throw std::invalid_argument("descend: invalid OptimizeConfig");
  const Index n = x.cols();
  const Scalar h = std::pow(Scalar(n), Scalar(-1) / Scalar(x.rows()));
  const Scalar max_move = static_cast<Scalar>(cfg.max_move.value_or(0.5 * h));
  if (!(max_move > 0)) throw std::invalid_argument("descend: max_move must be > 0");

  OptimizeTrace trace;
  detail::jitter_coincident(x, domain, cfg.seed);

  Matrix<Scalar> saved = x;
  StepEval<Scalar> saved_ev = problem.evaluate(x);
  problem.save();
  Scalar accepted = saved_ev.energy;
  Scalar lambda = static_cast<Scalar>(cfg.step_scale);
  trace.records.push_back({0, static_cast<double>(accepted), 0.0,
                           static_cast<double>(lambda)});

  Index done = 0;
  while (done < cfg.iterations) {
    const Index block = std::min(cfg.energy_check_every, cfg.iterations - done);
    StepEval<Scalar> ev = saved_ev;
    Scalar moved = 0;
    for (Index b = 0; b < block; ++b) {
      moved = detail::apply_step(x, ev, domain, lambda, max_move);
      ev = problem.evaluate(x);
    }
    Scalar reference = accepted;
    if constexpr (requires { problem.energy_at(saved); })
      reference = problem.energy_at(saved);
    const Scalar slack =
        Scalar(1e-12) * std::max(std::abs(reference), std::numeric_limits<Scalar>::min());
    if (!(ev.energy <= reference + slack)) {
      x = saved;
      problem.restore();
      lambda /= 2;
      if (++trace.halvings > cfg.max_halvings) break;
      continue;
    }
    done += block;
    accepted = ev.energy;
    saved = x;
    saved_ev = std::move(ev);
    problem.save();
    trace.records.push_back({done, static_cast<double>(accepted),
                             static_cast<double>(moved), static_cast<double>(lambda)});
  }
  return {std::move(x), std::move(trace)};
}

}  // namespace gbn
