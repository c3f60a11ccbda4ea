#include "gbn/core.hpp"

#include <algorithm>

namespace gbn {

DensityMap::DensityMap(Eigen::ArrayXXd values) : values_(std::move(values)) {
  if (values_.size() == 0)
    throw std::invalid_argument("DensityMap: empty image");
  if (!values_.allFinite() || values_.minCoeff() < 0.0 ||
      values_.maxCoeff() > 1.0)
    throw std::invalid_argument("DensityMap: values must lie in [0, 1]");
  mass_ = values_.sum();
  if (!(mass_ > 0.0))
    throw std::invalid_argument("DensityMap: density has zero mass");
}

DensityMap DensityMap::constant(Index width, Index height, double value) {
  return DensityMap(Eigen::ArrayXXd::Constant(height, width, value));
}

double DensityMap::at(double x, double y) const {
  const auto col = std::min<Index>(
      width() - 1, static_cast<Index>(toroidal_wrap(x) * static_cast<double>(width())));
  const auto row = std::min<Index>(
      height() - 1, static_cast<Index>(toroidal_wrap(y) * static_cast<double>(height())));
  return values_(row, col);
}

namespace detail {

std::optional<Index> exact_root(Index n, Index dim) {
  if (n < 1 || dim < 1) return std::nullopt;
  const auto guess = static_cast<Index>(
      std::llround(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim))));
  for (Index m = std::max<Index>(1, guess - 1); m <= guess + 1; ++m) {
    Index p = 1;
    for (Index a = 0; a < dim && p <= n; ++a) p *= m;
    if (p == n) return m;
  }
  return std::nullopt;
}

}  // namespace detail

PointSetd weighted_random_init(const DensityMap& density, Index n, Seed seed) {
  if (n < 1) throw std::invalid_argument("weighted_random_init: n must be >= 1");
  const double peak = density.values().maxCoeff();
  const auto w = static_cast<std::uint64_t>(density.width());
  const auto h = static_cast<std::uint64_t>(density.height());
  Matrix<double> c(2, n);
  for (Index k = 0; k < n; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    for (;;) {
      const auto col = rng.below(w);
      const auto row = rng.below(h);
      const double v = density(static_cast<Index>(row), static_cast<Index>(col));
      if (rng.uniform() * peak < v) {
        c(0, k) = toroidal_wrap((static_cast<double>(col) + rng.uniform()) /
                                static_cast<double>(w));
        c(1, k) = toroidal_wrap((static_cast<double>(row) + rng.uniform()) /
                                static_cast<double>(h));
        break;
      }
    }
  }
  return PointSetd(std::move(c), Domain::toroidal);
}

}  // namespace gbn
