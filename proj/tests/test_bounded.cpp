#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gbn/bounded.hpp"

using namespace gbn;

namespace {

// Midpoint quadrature of -int_{[0,1]^2} exp(-|y-x|^2/4s^2) (y - x) dy on a
// nodes^2 grid, rescaled to domain_gradient units.
Vector<double> quadrature_attraction(const Vector<double>& x, double s, int nodes = 2048) {
  const double h = 1.0 / nodes;
  std::vector<double> gx(nodes), gy(nodes), wx(nodes), wy(nodes);
  for (int t = 0; t < nodes; ++t) {
    const double y = (t + 0.5) * h;
    const double u = y - x(0), v = y - x(1);
    gx[t] = std::exp(-u * u / (4 * s * s));
    gy[t] = std::exp(-v * v / (4 * s * s));
    wx[t] = u;
    wy[t] = v;
  }
  double q0 = 0, q1 = 0;
  for (int a = 0; a < nodes; ++a)
    for (int b = 0; b < nodes; ++b) {
      const double w = gx[a] * gy[b] * h * h;
      q0 -= w * wx[a];
      q1 -= w * wy[b];
    }
  Vector<double> g(2);
  // the integral equals minus 2 s^2 (sqrt(pi) s) times the attraction
  const double scale = -2 * s * s * std::sqrt(std::numbers::pi) * s;
  g << q0 / scale, q1 / scale;
  return g;
}

double brute_bounded_energy(const PointSetd& p, const KernelConfigd& cfg, double balance) {
  double e = 0;
  for (Index k = 0; k < p.size(); ++k)
    for (Index l = k + 1; l < p.size(); ++l)
      e += std::exp(-(p.point(k) - p.point(l)).squaredNorm() / (2 * cfg.energy_var));
  for (Index k = 0; k < p.size(); ++k) {
    double ov = 1;
    for (Index a = 0; a < p.dim(); ++a) {
      const double x = p(a, k), s = cfg.sigma_abs;
      ov *= std::sqrt(std::numbers::pi) * s *
            (std::erf((1 - x) / (2 * s)) + std::erf(x / (2 * s)));
    }
    e -= balance * static_cast<double>(p.size()) * ov;
  }
  return e;
}

}  // namespace

TEST_CASE("domain_gradient") {
  SUBCASE("centre is force free") {
    for (Index d : {1, 2, 3, 5}) {
      const Vector<double> c = Vector<double>::Constant(d, 0.5);
      CHECK(domain_gradient(c, 0.1).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("points away from the nearest face") {
    Vector<double> x(2);
    x << 0.05, 0.5;
    const auto g = domain_gradient(x, 0.1);
    CHECK(g(0) > 0);
    x << 0.95, 0.5;
    CHECK(domain_gradient(x, 0.1)(0) < 0);
  }
  SUBCASE("reflection flips the component") {
    Rng rng(Seed{2}, 0);
    for (int k = 0; k < 50; ++k) {
      Vector<double> x(3);
      for (Index a = 0; a < 3; ++a) x(a) = rng.uniform();
      Vector<double> y = x;
      y(1) = 1 - x(1);
      const auto gx = domain_gradient(x, 0.07), gy = domain_gradient(y, 0.07);
      CHECK(gy(1) == doctest::Approx(-gx(1)).epsilon(1e-12));
      CHECK(gy(0) == doctest::Approx(gx(0)).epsilon(1e-12));
    }
  }
  SUBCASE("matches quadrature at (0.25, 0.5), sigma 0.1") {
    Vector<double> x(2);
    x << 0.25, 0.5;
    const auto g = domain_gradient(x, 0.1);
    const auto q = quadrature_attraction(x, 0.1);
    CHECK(std::abs(g(0) - q(0)) <= 1e-4 * std::abs(q(0)));
    CHECK(std::abs(g(1)) < 1e-12);
    CHECK(std::abs(q(1)) < 1e-9);
  }
}

TEST_CASE("bounded energy and direction") {
  const Index n = 40;
  const auto cfg = KernelConfigd::make(1.0, n, 2);
  const PointSetd p(random_init(n, 2, Seed{3}).coords(), Domain::bounded);
  CHECK(bounded_energy(p, cfg) == doctest::Approx(brute_bounded_energy(p, cfg, 1.0)).epsilon(1e-12));
  CHECK(bounded_energy(p, cfg, 0.3) ==
        doctest::Approx(brute_bounded_energy(p, cfg, 0.3)).epsilon(1e-12));

  const Matrix<double> dir = bounded_direction(p, cfg);
  const double h = 1e-3 * cfg.sigma_abs;
  double worst = 0;
  for (Index k = 0; k < n; ++k)
    for (Index a = 0; a < 2; ++a) {
      auto at = [&](double t) {
        Matrix<double> x = p.coords();
        x(a, k) += t;
        return brute_bounded_energy(PointSetd(x, Domain::bounded), cfg, 1.0);
      };
      const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      const double expect = -cfg.energy_var * fd;
      const double scale = std::max(std::abs(expect), 1e-2 * dir.cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(dir(a, k) - expect) / scale);
    }
  CHECK(worst <= 1e-5);
}

TEST_CASE("optimize_bounded") {
  SUBCASE("a single point moves to the centre") {
    Matrix<double> x(2, 1);
    x << 0.1, 0.8;
    const auto cfg = KernelConfigd::make(1.0, 1, 2);
    OptimizeConfig oc;
    oc.iterations = 500;
    const auto out = optimize_bounded(PointSetd(x, Domain::bounded), cfg, oc).first;
    CHECK(std::abs(out(0, 0) - 0.5) < 1e-6);
    CHECK(std::abs(out(1, 0) - 0.5) < 1e-6);
  }
  SUBCASE("reflection symmetric input stays symmetric") {
    // pairs (a, b) and (b, a) plus points on the diagonal
    Rng rng(Seed{5}, 0);
    const Index half = 30;
    Matrix<double> x(2, 2 * half + 4);
    for (Index k = 0; k < half; ++k) {
      const double a = rng.uniform(), b = rng.uniform();
      x.col(2 * k) << a, b;
      x.col(2 * k + 1) << b, a;
    }
    for (Index k = 0; k < 4; ++k) {
      const double t = 0.1 + 0.25 * k;
      x.col(2 * half + k) << t, t;
    }
    const auto cfg = KernelConfigd::make(1.0, x.cols(), 2);
    OptimizeConfig oc;
    oc.iterations = 300;
    const auto out = optimize_bounded(PointSetd(x, Domain::bounded), cfg, oc).first;
    double worst = 0;
    for (Index k = 0; k < half; ++k) {
      worst = std::max(worst, std::abs(out(0, 2 * k) - out(1, 2 * k + 1)));
      worst = std::max(worst, std::abs(out(1, 2 * k) - out(0, 2 * k + 1)));
    }
    for (Index k = 0; k < 4; ++k)
      worst = std::max(worst, std::abs(out(0, 2 * half + k) - out(1, 2 * half + k)));
    CHECK(worst < 1e-9);
  }
  SUBCASE("points stay inside and keep off the faces") {
    const Index n = 256;
    const auto cfg = KernelConfigd::make(1.0, n, 2);
    OptimizeConfig oc;
    oc.iterations = 2000;
    const PointSetd p(random_init(n, 2, Seed{6}).coords(), Domain::bounded);
    const auto [out, trace] = optimize_bounded(p, cfg, oc);
    CHECK(out.coords().minCoeff() >= 0.0);
    CHECK(out.coords().maxCoeff() <= 1.0);
    CHECK(face_offsets(out).minCoeff() > 0.05 * cfg.sigma_abs);
    for (std::size_t k = 1; k < trace.records.size(); ++k)
      CHECK(trace.records[k].energy <= trace.records[k - 1].energy + 1e-12 * std::abs(trace.records[k - 1].energy));
  }
  SUBCASE("toroidal input is rejected") {
    const auto cfg = KernelConfigd::make(1.0, 4, 2);
    CHECK_THROWS_AS(optimize_bounded(random_init(4, 2, Seed{1}), cfg, OptimizeConfig{}),
                    std::invalid_argument);
  }
}
