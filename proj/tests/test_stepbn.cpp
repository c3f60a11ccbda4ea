#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gbn/spectral.hpp"
#include "gbn/stepbn.hpp"

using namespace gbn;

namespace {

double brute_step_energy(const PointSetd& p, double s2, int cut) {
  double e = 0;
  for (Index i = 0; i < p.size(); ++i)
    for (Index j = i + 1; j < p.size(); ++j)
      e += truncated_pair_terms(Vector<double>(p.point(i) - p.point(j)), s2, cut).energy;
  return e;
}

double in_band_mean(const PointSetd& p, int cut) {
  const auto rp = radial_profile(periodogram(p, cut + 4));
  double s = 0;
  int m = 0;
  for (const auto& e : rp.entries)
    if (e.r <= cut) {
      s += e.mean_power;
      ++m;
    }
  return s / m;
}

}  // namespace

TEST_CASE("truncated axis series") {
  const double pi = std::numbers::pi;
  SUBCASE("long series recovers the theta kernel") {
    Rng rng(Seed{1}, 0);
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform();
      const double s2 = 0.002 + 0.1 * rng.uniform();
      const double pre = std::sqrt(2 * pi * s2);
      const auto t = truncated_axis(x, s2, 100000);
      const auto th = axis_theta_eval(x, s2, 200);
      CHECK(std::abs(pre * t.value - th.value) <= 1e-10);
      // theta slope is -s2 times the derivative
      CHECK(std::abs(-s2 * pre * t.slope - th.slope) <= 1e-10);
    }
  }
  SUBCASE("single harmonic") {
    const double s2 = 0.01, x = 0.3;
    const double q = std::exp(-2 * pi * pi * s2);
    CHECK(truncated_axis(x, s2, 1).value == doctest::Approx(1 + 2 * q * std::cos(2 * pi * x)));
  }
  SUBCASE("terms below machine epsilon are dropped") {
    const double s2 = 0.05;
    CHECK(truncated_axis(0.2, s2, 1000).value == truncated_axis(0.2, s2, 40).value);
  }
  CHECK_THROWS_AS(truncated_axis(0.1, 0.01, 0), std::invalid_argument);
}

TEST_CASE("truncated_pair_terms") {
  Vector<double> z = Vector<double>::Zero(3);
  CHECK(truncated_pair_terms(z, 0.003, 7).gradient.cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(Seed{2}, 0);
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const Index d = 1 + static_cast<Index>(rng.below(3));
    const double s2 = 0.001 + 0.02 * rng.uniform();
    const int cut = 1 + static_cast<int>(rng.below(20));
    Vector<double> x(d);
    for (Index a = 0; a < d; ++a) x(a) = rng.uniform() - 0.5;
    const auto t = truncated_pair_terms(x, s2, cut);
    const double h = 1e-3 / cut;
    double gmax = t.gradient.cwiseAbs().maxCoeff();
    for (Index r = 0; r < d; ++r) {
      // long double keeps the stencil clear of roundoff where the
      // energy is large and the gradient small
      auto at = [&](long double u) {
        Vector<long double> y = x.cast<long double>();
        y(r) += u;
        return truncated_pair_terms(y, static_cast<long double>(s2), cut).energy;
      };
      const long double hl = h;
      const double fd = static_cast<double>(
          (8 * (at(hl) - at(-hl)) - (at(2 * hl) - at(-2 * hl))) / (12 * hl));
      const double scale = std::max({std::abs(fd), 1e-2 * gmax, 1e-12});
      worst = std::max(worst, std::abs(t.gradient(r) - fd) / scale);
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("StepEnergy Fourier form") {
  for (Index d : {1, 2, 3}) {
    const Index n = 20;
    const auto p = random_init(n, d, Seed{static_cast<std::uint64_t>(10 + d)});
    const double s2 = 0.004;
    const int cut = d == 3 ? 3 : 6;
    const StepEnergy<double> se(d, s2, cut);
    Matrix<double> g;
    const double e = se.evaluate(p.coords(), &g);
    CHECK(e == doctest::Approx(brute_step_energy(p, s2, cut)).epsilon(1e-10));

    // gradient against pair sums of truncated_pair_terms
    Matrix<double> ref = Matrix<double>::Zero(d, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j)
          ref.col(i) += truncated_pair_terms(Vector<double>(p.point(i) - p.point(j)), s2, cut).gradient;
    CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-9 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("optimize_step") {
  SUBCASE("single point unchanged") {
    const auto p = random_init(1, 2, Seed{1});
    CHECK(optimize_step(p, 4, OptimizeConfig{}).first == p);
  }
  SUBCASE("2d low band is suppressed") {
    const auto p = random_init(256, 2, Seed{3});
    auto oc = step_default_config(2);
    oc.iterations = 10000;
    const auto [out, trace] = optimize_step(p, 7, oc);
    CHECK(in_band_mean(out, 7) < 1e-8);
    for (std::size_t k = 1; k < trace.records.size(); ++k)
      CHECK(trace.records[k].energy <= trace.records[k - 1].energy * (1 + 1e-12));
  }
  SUBCASE("1d, 16 points, cut 4") {
    auto oc = step_default_config(1);
    CHECK(oc.step_scale == 0.25);
    oc.iterations = 5000;
    const auto out = optimize_step(random_init(16, 1, Seed{4}), 4, oc).first;
    CHECK(in_band_mean(out, 4) < 1e-8);
  }
  SUBCASE("floor degrades once the cut exceeds the frequency budget") {
    // 64 points carry 128 coordinates; the half cube holds 60, 144, 264 frequencies
    double prev = -1;
    for (int cut : {5, 8, 11}) {
      auto oc = step_default_config(2);
      oc.iterations = 3000;
      double m = 0;
      for (std::uint64_t s = 0; s < 2; ++s)
        m += in_band_mean(optimize_step(random_init(64, 2, Seed{s}), cut, oc).first, cut);
      CHECK(m > prev);
      prev = m;
    }
  }
}
