#include "doctest.h"

#include <set>

#include "gbn/core.hpp"

using namespace gbn;

TEST_CASE("toroidal_wrap") {
  CHECK(toroidal_wrap(1.25) == doctest::Approx(0.25));
  CHECK(toroidal_wrap(-0.1) == doctest::Approx(0.9));
  CHECK(toroidal_wrap(0.0) == 0.0);
  CHECK(toroidal_wrap(-1e-18) == 0.0);  // rounds to 1, must stay in [0,1)
  CHECK(toroidal_wrap(3.0) == 0.0);
}

TEST_CASE("PointSet validation") {
  Matrix<double> c(2, 2);
  c << 0.1, 0.2, 0.3, 1.0;
  CHECK_THROWS_AS(PointSetd(c, Domain::toroidal), std::invalid_argument);
  CHECK_NOTHROW(PointSetd(c, Domain::bounded));
  c(0, 0) = std::nan("");
  CHECK_THROWS_AS(PointSetd(c, Domain::bounded), std::invalid_argument);
  Matrix<double> raw(1, 3);
  raw << -0.25, 1.5, 0.5;
  const auto wrapped = PointSetd::fit(raw, Domain::toroidal);
  CHECK(wrapped(0, 0) == doctest::Approx(0.75));
  CHECK(wrapped(0, 1) == doctest::Approx(0.5));
  const auto clamped = PointSetd::fit(raw, Domain::bounded);
  CHECK(clamped(0, 0) == 0.0);
  CHECK(clamped(0, 1) == 1.0);
}

TEST_CASE("random_init") {
  const auto one = random_init(1, 2, Seed{1});
  CHECK(one.size() == 1);
  CHECK(one.coords().minCoeff() >= 0.0);
  CHECK(one.coords().maxCoeff() < 1.0);

  const auto big = random_init(1000, 2, Seed{2});
  for (Index a = 0; a < 2; ++a)
    CHECK(big.coords().row(a).mean() == doctest::Approx(0.5).epsilon(0.1));

  CHECK(random_init(4, 8, Seed{3}).flat().size() == 32);
  CHECK(random_init(50, 3, Seed{9}) == random_init(50, 3, Seed{9}));
  CHECK_FALSE(random_init(50, 3, Seed{9}) == random_init(50, 3, Seed{10}));
  CHECK_THROWS_AS(random_init(0, 2, Seed{1}), std::invalid_argument);
  CHECK_THROWS_AS(random_init(3, 0, Seed{1}), std::invalid_argument);
}

namespace {

// cell index of every point in the m^d partition
std::set<Index> occupied_cells(const PointSetd& p, Index m) {
  std::set<Index> cells;
  for (Index k = 0; k < p.size(); ++k) {
    Index code = 0;
    for (Index a = p.dim() - 1; a >= 0; --a)
      code = code * m + static_cast<Index>(p(a, k) * static_cast<double>(m));
    cells.insert(code);
  }
  return cells;
}

}  // namespace

TEST_CASE("stratified_init covers every cell once") {
  CHECK(occupied_cells(stratified_init(4, 2, Seed{1}), 2).size() == 4);
  CHECK(occupied_cells(stratified_init(16, 2, Seed{2}), 4).size() == 16);
  CHECK(occupied_cells(stratified_init(8, 3, Seed{3}), 2).size() == 8);
  CHECK(occupied_cells(stratified_init(4096, 4, Seed{4}), 8).size() == 4096);
  CHECK(stratified_init(64, 2, Seed{5}) == stratified_init(64, 2, Seed{5}));
  CHECK_THROWS_AS(stratified_init(10, 2, Seed{1}), std::invalid_argument);
  CHECK_THROWS_AS(stratified_init(16, 3, Seed{1}), std::invalid_argument);
}

TEST_CASE("regular_grid") {
  const auto g = regular_grid(4, 2);
  CHECK(g.size() == 16);
  CHECK(g(0, 0) == doctest::Approx(0.125));
  CHECK(g(1, 15) == doctest::Approx(0.875));
}

TEST_CASE("DensityMap") {
  CHECK_THROWS_AS(DensityMap(Eigen::ArrayXXd::Zero(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(DensityMap(Eigen::ArrayXXd::Constant(4, 4, 1.5)), std::invalid_argument);
  const auto c = DensityMap::constant(8, 4, 0.5);
  CHECK(c.width() == 8);
  CHECK(c.height() == 4);
  CHECK(c.mass() == doctest::Approx(16.0));
}

TEST_CASE("weighted_random_init") {
  SUBCASE("constant density is uniform") {
    const auto p = weighted_random_init(DensityMap::constant(16, 16), 1000, Seed{1});
    for (Index a = 0; a < 2; ++a)
      CHECK(p.coords().row(a).mean() == doctest::Approx(0.5).epsilon(0.1));
  }
  SUBCASE("support containment") {
    Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(8, 8);
    v.leftCols(4) = 1.0;
    const auto p = weighted_random_init(DensityMap(v), 2000, Seed{2});
    CHECK(p.coords().row(0).maxCoeff() < 0.5);
  }
  SUBCASE("two-level density, chi-square at significance 0.01") {
    // left half 0.25, right half 0.75: expected mass fractions 1/4 and 3/4
    Eigen::ArrayXXd v(10, 10);
    v.leftCols(5) = 0.25;
    v.rightCols(5) = 0.75;
    const Index n = 10000;
    const auto p = weighted_random_init(DensityMap(v), n, Seed{3});
    // regions: 4 quadrant-like blocks (left/right x top/bottom)
    double observed[4] = {0, 0, 0, 0};
    for (Index k = 0; k < n; ++k) {
      const int r = (p(0, k) >= 0.5 ? 2 : 0) + (p(1, k) >= 0.5 ? 1 : 0);
      observed[r] += 1;
    }
    const double expected[4] = {n / 8.0, n / 8.0, 3 * n / 8.0, 3 * n / 8.0};
    double chi2 = 0;
    for (int r = 0; r < 4; ++r)
      chi2 += (observed[r] - expected[r]) * (observed[r] - expected[r]) / expected[r];
    CHECK(chi2 < 11.345);  // 99% quantile, 3 degrees of freedom
    const double ratio = (observed[2] + observed[3]) / (observed[0] + observed[1]);
    CHECK(ratio == doctest::Approx(3.0).epsilon(0.1));
  }
  SUBCASE("determinism") {
    const auto d = DensityMap::constant(4, 4, 0.3);
    CHECK(weighted_random_init(d, 100, Seed{7}) == weighted_random_init(d, 100, Seed{7}));
  }
}

TEST_CASE("toroidal_shift") {
  const auto p = random_init(10, 2, Seed{4});
  Vector<double> t(2);
  t << 0.7, 0.4;
  const auto q = toroidal_shift(p, t);
  for (Index k = 0; k < 10; ++k)
    CHECK(q(0, k) == doctest::Approx(toroidal_wrap(p(0, k) + 0.7)));
}

TEST_CASE("KernelConfig") {
  const auto c = KernelConfigd::make(1.0, 1024, 2);
  CHECK(c.sigma_abs == doctest::Approx(1.0 / 32));
  CHECK(c.energy_var == doctest::Approx(2 * c.sigma_abs * c.sigma_abs));
  CHECK(c.periods >= 1);
  CHECK(KernelConfigd::make(1.0, 1, 1).periods == 13);
  CHECK_THROWS_AS(KernelConfigd::make(0.0, 4, 2), std::invalid_argument);
}
