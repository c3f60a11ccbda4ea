#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gbn/adaptive.hpp"
#include "gbn/uniform.hpp"

using namespace gbn;

namespace {

PointSetd grid_points(Index m) {
  Matrix<double> x(2, m * m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      x(0, i * m + j) = (static_cast<double>(i) + 0.5) / m;
      x(1, i * m + j) = (static_cast<double>(j) + 0.5) / m;
    }
  return PointSetd(std::move(x), Domain::toroidal);
}

Eigen::VectorXd random_shapes(Index n, std::uint64_t seed) {
  Rng rng(Seed{seed}, 0);
  Eigen::VectorXd a(n);
  for (Index k = 0; k < n; ++k) a(k) = 0.5 + 1.5 * rng.uniform();
  return a;
}

// Direct replica sum over a generous symmetric image range.
double brute_adaptive_energy(const AdaptiveState& s, int images) {
  const auto& x = s.points.coords();
  const Index n = x.cols();
  const double ev = s.kcfg.energy_var;
  double e = 0;
  for (Index k = 0; k < n; ++k)
    for (Index l = k + 1; l < n; ++l) {
      const double akl = mutual_shape(s.shapes.a(k), s.shapes.a(l));
      for (int i = -images; i <= images; ++i)
        for (int j = -images; j <= images; ++j) {
          const double dx = x(0, k) - x(0, l) + i, dy = x(1, k) - x(1, l) + j;
          e += akl * std::exp(-akl * (dx * dx + dy * dy) / (2 * ev));
        }
    }
  return std::numbers::pi * ev / static_cast<double>(n) * e;
}

}  // namespace

TEST_CASE("mutual_shape") {
  CHECK(mutual_shape(1, 1) == 1);
  CHECK(mutual_shape(0.7, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(mutual_shape(1, 3) == mutual_shape(3, 1));
  CHECK(mutual_shape(1, 3) == doctest::Approx(1.5));
}

TEST_CASE("shape_factors") {
  const double sigma = 1.0 / 8;
  SUBCASE("regular grid gives a = 1") {
    const auto s = shape_factors(grid_points(8), sigma, 5);
    CHECK((s.a.array() - 1).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("clusters get larger factors than the sparse field") {
    Rng rng(Seed{3}, 0);
    Matrix<double> x(2, 80);
    for (Index k = 0; k < 80; ++k) {
      if (k < 40) {  // two tight clusters
        const double cx = k < 20 ? 0.25 : 0.75;
        x(0, k) = cx + 0.03 * (rng.uniform() - 0.5);
        x(1, k) = 0.5 + 0.03 * (rng.uniform() - 0.5);
      } else {
        x(0, k) = rng.uniform();
        x(1, k) = rng.uniform();
      }
    }
    const auto s = shape_factors(PointSetd(x, Domain::toroidal), 0.05, 1);
    double sparse_max = 0;
    for (Index k = 40; k < 80; ++k) {
      const double d1 = std::hypot(x(0, k) - 0.25, x(1, k) - 0.5);
      const double d2 = std::hypot(x(0, k) - 0.75, x(1, k) - 0.5);
      if (std::min(d1, d2) > 0.15) sparse_max = std::max(sparse_max, s.a(k));
    }
    CHECK(sparse_max > 0);
    CHECK(s.a.head(40).minCoeff() > sparse_max);
    CHECK(s.a.squaredNorm() / 80 == doctest::Approx(1).epsilon(1e-12));

    // one pass from a = 1 against a direct nearest-image density sum
    Eigen::VectorXd d(80);
    for (Index i = 0; i < 80; ++i) {
      d(i) = 0;
      for (Index j = 0; j < 80; ++j) {
        if (i == j) continue;
        double dx = x(0, i) - x(0, j), dy = x(1, i) - x(1, j);
        dx -= std::round(dx);
        dy -= std::round(dy);
        d(i) += std::exp(-(dx * dx + dy * dy) / (2 * 0.05 * 0.05));
      }
    }
    d /= std::sqrt(d.squaredNorm() / 80);
    CHECK((d - s.a).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("fixed point is stable") {
    const auto p = random_init(200, 2, Seed{4});
    const auto s = shape_factors(p, 0.06, 200);
    const auto t = shape_factors(p, 0.06, 1, &s);
    CHECK((s.a - t.a).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(shape_factors(random_init(1, 2, Seed{1}), 0.1, 1), std::invalid_argument);
}

TEST_CASE("adaptive_energy") {
  SUBCASE("a = 1 reduces to the uniform energy") {
    const auto p = random_init(64, 2, Seed{5});
    const auto k = KernelConfigd::make(1.0, 64, 2);
    AdaptiveState s{p, {Eigen::VectorXd::Ones(64)}, std::nullopt, k};
    CHECK(adaptive_energy(s) == doctest::Approx(bn_energy(p, k)).epsilon(1e-13));
    const auto g = adaptive_gradient(s), ref = bn_gradient(p, k);
    CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-13 * ref.cwiseAbs().maxCoeff());
  }
  SUBCASE("three points, random shapes, against direct sum") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = random_init(3, 2, Seed{seed});
      const auto k = KernelConfigd::make(0.3, 3, 2);
      AdaptiveState s{p, {random_shapes(3, seed + 100)}, std::nullopt, k};
      CHECK(adaptive_energy(s) == doctest::Approx(brute_adaptive_energy(s, 6)).epsilon(1e-12));
    }
  }
  SUBCASE("permutation symmetry") {
    const auto p = random_init(30, 2, Seed{6});
    const auto k = KernelConfigd::make(1.0, 30, 2);
    const auto a = random_shapes(30, 7);
    Matrix<double> x = p.coords();
    Eigen::VectorXd b = a;
    for (Index i = 0; i < 30; ++i) {
      x.col(i) = p.coords().col(29 - i);
      b(i) = a(29 - i);
    }
    AdaptiveState s{p, {a}, std::nullopt, k};
    AdaptiveState t{PointSetd(x, Domain::toroidal), {b}, std::nullopt, k};
    CHECK(adaptive_energy(s) == doctest::Approx(adaptive_energy(t)).epsilon(1e-13));
  }
}

TEST_CASE("adaptive_gradient with frozen shapes") {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 12;
    const auto p = random_init(n, 2, Seed{seed});
    const auto k = KernelConfigd::make(1.0, n, 2);
    AdaptiveState s{p, {random_shapes(n, seed + 50)}, std::nullopt, k};
    const auto g = adaptive_gradient(s);
    const double h = 1e-3 * k.sigma_abs;
    for (Index i = 0; i < n; ++i)
      for (Index r = 0; r < 2; ++r) {
        auto at = [&](double u) {
          AdaptiveState t = s;
          Matrix<double> x = p.coords();
          x(r, i) += u;
          t.points = PointSetd(std::move(x), Domain::toroidal);
          return adaptive_energy(t);
        };
        const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
        const double scale = std::max(std::abs(fd), 1e-3 * g.cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(g(r, i) - fd) / scale);
      }
  }
  CHECK(worst <= 1e-5);

  SUBCASE("coincident pair contributes nothing") {
    Matrix<double> x(2, 2);
    x << 0.3, 0.3, 0.6, 0.6;
    AdaptiveState s{PointSetd(x, Domain::toroidal), {Eigen::Vector2d(0.8, 1.2)}, std::nullopt,
                    KernelConfigd::make(1.0, 2, 2)};
    CHECK(adaptive_gradient(s).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("pixel field and attraction") {
  const Index n = 64;
  const auto k = KernelConfigd::make(1.0, n, 2);

  SUBCASE("pixel mass matches point mass") {
    Eigen::ArrayXXd v = 0.55 + 0.45 * Eigen::ArrayXXd::Random(16, 16);
    const auto f = PixelField::make(DensityMap(v), n);
    CHECK(f.amplitude.sum() == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
    // kappa makes density-distributed points have mean a^2 = 1
    const Eigen::ArrayXd rho = f.amplitude.array() / f.amplitude.sum();
    CHECK((rho * f.shape.array().square()).sum() == doctest::Approx(1).epsilon(1e-12));
  }
  SUBCASE("constant density, point at a symmetric spot") {
    const auto f = PixelField::make(DensityMap::constant(32, 32), n);
    Matrix<double> x(2, 1);
    x << 0.5, 0.5;
    AdaptiveState s{PointSetd(x, Domain::toroidal), {Eigen::VectorXd::Ones(1)}, std::nullopt, k};
    const auto pull = pixel_attraction(s, f, 0);
    CHECK(pull.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("single dense pixel pulls toward itself") {
    Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(16, 16);
    v(12, 4) = 1;  // row 12, col 4: centre (4.5/16, 12.5/16)
    const auto f = PixelField::make(DensityMap(v), n);
    Matrix<double> x(2, 1);
    x << 0.35, 0.7;
    AdaptiveState s{PointSetd(x, Domain::toroidal), {Eigen::VectorXd::Ones(1)}, std::nullopt, k};
    const Eigen::VectorXd pull = pixel_attraction(s, f, 0);
    const Eigen::Vector2d to(4.5 / 16 - 0.35, 12.5 / 16 - 0.7);
    CHECK(pull.norm() > 0);
    CHECK(pull.dot(to) / (pull.norm() * to.norm()) == doctest::Approx(1).epsilon(1e-12));
  }
  SUBCASE("attraction is minus the gradient of the cross energy") {
    Rng rng(Seed{8}, 0);
    Eigen::ArrayXXd v(24, 24);
    for (Index i = 0; i < v.size(); ++i) v(i) = 0.05 + 0.95 * rng.uniform();
    const auto f = PixelField::make(DensityMap(v), n);
    const auto p = random_init(n, 2, Seed{9});
    AdaptiveState s{p, {random_shapes(n, 10)}, std::nullopt, k};
    const double h = 1e-3 * k.sigma_abs;
    double worst = 0;
    for (Index i = 0; i < n; i += 4) {
      const Eigen::VectorXd pull = pixel_attraction(s, f, i);
      for (Index r = 0; r < 2; ++r) {
        auto at = [&](double u) {
          AdaptiveState t = s;
          Matrix<double> x = p.coords();
          x(r, i) += u;
          t.points = PointSetd(std::move(x), Domain::toroidal);
          return pixel_energy(t, f);
        };
        const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
        const double scale = std::max(std::abs(fd), 1e-3 * pull.cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(-pull(r) - fd) / scale);
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("reconstruct and blur") {
  const auto k = KernelConfigd::make(1.0, 64, 2);
  SUBCASE("single point gives a single blob") {
    Matrix<double> x(2, 1);
    x << 17.5 / 32, 9.5 / 32;
    const auto img = reconstruct(PointSetd(x, Domain::toroidal), {Eigen::VectorXd::Ones(1)}, k,
                                 32, 32);
    Index r, c;
    CHECK(img.maxCoeff(&r, &c) == doctest::Approx(1));
    CHECK(r == 9);
    CHECK(c == 17);
    CHECK(img(9, 16) == doctest::Approx(img(9, 18)).epsilon(1e-12));
    CHECK(img(8, 17) == doctest::Approx(img(10, 17)).epsilon(1e-12));
    CHECK(img(9, 16) < img(9, 17));
  }
  SUBCASE("target mean") {
    const auto p = random_init(64, 2, Seed{2});
    const auto img = reconstruct(p, {Eigen::VectorXd::Ones(64)}, k, 20, 30, 0.4);
    CHECK(img.rows() == 30);
    CHECK(img.cols() == 20);
    CHECK(img.mean() == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("regular grid reconstructs flat") {
    const auto img = reconstruct(grid_points(8), {Eigen::VectorXd::Ones(64)}, k, 32, 32);
    const double cv = std::sqrt((img - img.mean()).square().mean()) / img.mean();
    CHECK(cv < 0.05);
  }
  SUBCASE("blur keeps the mean and flattens") {
    Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(32, 32);
    v(5, 7) = 1;
    const auto b = blur(v, 0.05);
    CHECK(b.mean() == doctest::Approx(v.mean()).epsilon(1e-12));
    CHECK(b.maxCoeff() < 1);
    Index r, c;
    b.maxCoeff(&r, &c);
    CHECK(r == 5);
    CHECK(c == 7);
  }
}

TEST_CASE("optimize_adaptive") {
  SUBCASE("constant density keeps shapes near one") {
    const Index n = 256;
    const auto k = KernelConfigd::make(1.0, n, 2);
    OptimizeConfig oc;
    oc.iterations = 300;
    const auto [p, s, trace] = optimize_adaptive(DensityMap::constant(32, 32), n, k, oc);
    CHECK(p.size() == n);
    CHECK(s.a.squaredNorm() / n == doctest::Approx(1).epsilon(1e-12));
    CHECK((s.a.array() - 1).abs().maxCoeff() < 0.05);
    CHECK(trace.records.back().energy < trace.records.front().energy);
  }
  CHECK_THROWS_AS(optimize_adaptive(DensityMap::constant(4, 4), 1, KernelConfigd::make(1, 1, 2),
                                    OptimizeConfig{}),
                  std::invalid_argument);
}
