#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "gbn/rng.hpp"

namespace gbn {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Domain { toroidal, bounded };

inline const char* to_string(Domain d) {
  return d == Domain::toroidal ? "toroidal" : "bounded";
}

/// x mod 1 in [0, 1).
template <typename Scalar>
Scalar toroidal_wrap(Scalar x) {
  Scalar r = x - std::floor(x);
  // -tiny wraps to exactly 1 in floating point
  return r >= Scalar(1) ? Scalar(0) : r;
}

/// N points in the unit box, one point per column (coords is dim x n).
///
/// Toroidal sets live in [0,1)^d, bounded sets in [0,1]^d. The set is a value:
/// optimizers return new sets rather than mutating their input.
template <typename Scalar>
class PointSet {
 public:
  using MatrixType = Matrix<Scalar>;

  PointSet(MatrixType coords, Domain domain)
      : coords_(std::move(coords)), domain_(domain) {
    if (coords_.rows() < 1 || coords_.cols() < 1)
      throw std::invalid_argument("PointSet: need dim >= 1 and n >= 1");
    for (Index k = 0; k < coords_.size(); ++k) {
      const Scalar v = coords_.data()[k];
      if (!std::isfinite(v) || v < Scalar(0) || v > Scalar(1) ||
          (domain_ == Domain::toroidal && v == Scalar(1)))
        throw std::invalid_argument("PointSet: coordinate out of domain: " +
                                    std::to_string(static_cast<double>(v)));
    }
  }

  /// Wraps (toroidal) or clamps (bounded) raw coordinates into the domain.
  static PointSet fit(MatrixType coords, Domain domain) {
    for (Index k = 0; k < coords.size(); ++k) {
      Scalar& v = coords.data()[k];
      v = domain == Domain::toroidal ? toroidal_wrap(v)
                                     : std::clamp(v, Scalar(0), Scalar(1));
    }
    return PointSet(std::move(coords), domain);
  }

  Index dim() const noexcept { return coords_.rows(); }
  Index size() const noexcept { return coords_.cols(); }
  Domain domain() const noexcept { return domain_; }

  const MatrixType& coords() const noexcept { return coords_; }
  auto point(Index k) const { return coords_.col(k); }
  Scalar operator()(Index axis, Index k) const { return coords_(axis, k); }

  /// Point-major flat view, n * dim values.
  std::span<const Scalar> flat() const noexcept {
    return {coords_.data(), static_cast<std::size_t>(coords_.size())};
  }

  template <typename Other>
  PointSet<Other> cast() const {
    return PointSet<Other>(coords_.template cast<Other>(), domain_);
  }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.domain_ == b.domain_ && a.coords_.rows() == b.coords_.rows() &&
           a.coords_.cols() == b.coords_.cols() && a.coords_ == b.coords_;
  }

 private:
  MatrixType coords_;
  Domain domain_;
};

using PointSetd = PointSet<double>;

/// Gaussian filter width and the quantities derived from it.
///
/// sigma_rel is in units of the nominal grid spacing n^{-1/d}. The pair energy
/// kernel is exp(-r^2 / (2 energy_var)) with energy_var = 2 sigma_abs^2.
/// periods is the replica count per axis: images up to `periods` unit cells
/// away are summed, which covers support_sigmas standard deviations of the
/// energy kernel.
template <typename Scalar>
struct KernelConfig {
  Scalar sigma_rel = 1;
  Scalar sigma_abs = 0;
  Scalar energy_var = 0;
  Scalar support_sigmas = 9;
  int periods = 1;
  /// Drops pairs farther apart than this many sigma_abs (nearest image).
  /// Only meant for truncated-support ablations; empty means full support.
  std::optional<Scalar> truncate_sigmas;

  static KernelConfig make(Scalar sigma_rel, Index n, Index dim,
                           Scalar support_sigmas = 9) {
    if (!(sigma_rel > 0) || n < 1 || dim < 1 || !(support_sigmas > 0))
      throw std::invalid_argument("KernelConfig: invalid parameters");
    KernelConfig c;
    c.sigma_rel = sigma_rel;
    c.sigma_abs = sigma_rel * std::pow(Scalar(n), Scalar(-1) / Scalar(dim));
    c.energy_var = 2 * c.sigma_abs * c.sigma_abs;
    c.support_sigmas = support_sigmas;
    c.periods = periods_for(c.energy_var, support_sigmas);
    return c;
  }

  static int periods_for(Scalar energy_var, Scalar support_sigmas = 9) {
    const Scalar reach = support_sigmas * std::sqrt(energy_var);
    return std::max(1, static_cast<int>(std::ceil(reach)));
  }
};

using KernelConfigd = KernelConfig<double>;

/// Grayscale density over the unit square. values(row, col) in [0, 1] with
/// 1 = maximum point density. Pixel (row, col) covers
/// x in [col/W, (col+1)/W), y in [row/H, (row+1)/H).
class DensityMap {
 public:
  DensityMap(Eigen::ArrayXXd values);

  /// Constant density, e.g. for uniform-equivalence runs.
  static DensityMap constant(Index width, Index height, double value = 1.0);

  Index width() const noexcept { return values_.cols(); }
  Index height() const noexcept { return values_.rows(); }
  const Eigen::ArrayXXd& values() const noexcept { return values_; }
  double operator()(Index row, Index col) const { return values_(row, col); }
  double mass() const noexcept { return mass_; }
  double mean() const noexcept {
    return mass_ / static_cast<double>(values_.size());
  }

  /// Density at a point of the unit square (nearest pixel, toroidal).
  double at(double x, double y) const;

 private:
  Eigen::ArrayXXd values_;
  double mass_ = 0;
};

namespace detail {
/// Integer m with m^dim == n, if any.
std::optional<Index> exact_root(Index n, Index dim);
}  // namespace detail

/// n i.i.d. uniform points on the torus [0,1)^dim.
template <typename Scalar = double>
PointSet<Scalar> random_init(Index n, Index dim, Seed seed) {
  if (n < 1 || dim < 1)
    throw std::invalid_argument("random_init: n and dim must be >= 1");
  Matrix<Scalar> c(dim, n);
  for (Index k = 0; k < n; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    for (Index a = 0; a < dim; ++a)
      c(a, k) = toroidal_wrap(static_cast<Scalar>(rng.uniform()));
  }
  return PointSet<Scalar>(std::move(c), Domain::toroidal);
}

/// Jittered grid: one uniform sample in each cell of the m^dim partition.
template <typename Scalar = double>
PointSet<Scalar> stratified_init(Index n, Index dim, Seed seed) {
  if (n < 1 || dim < 1)
    throw std::invalid_argument("stratified_init: n and dim must be >= 1");
  const auto m = detail::exact_root(n, dim);
  if (!m)
    throw std::invalid_argument("stratified_init: n is not a perfect power");
  Matrix<Scalar> c(dim, n);
  for (Index k = 0; k < n; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    Index cell = k;
    for (Index a = 0; a < dim; ++a) {
      const Index digit = cell % *m;
      cell /= *m;
      const double v = (static_cast<double>(digit) + rng.uniform()) /
                       static_cast<double>(*m);
      c(a, k) = toroidal_wrap(static_cast<Scalar>(v));
    }
  }
  return PointSet<Scalar>(std::move(c), Domain::toroidal);
}

/// Regular grid with cell-centred points, m^dim points.
template <typename Scalar = double>
PointSet<Scalar> regular_grid(Index m, Index dim, Domain domain = Domain::toroidal,
                              Scalar offset = Scalar(0.5)) {
  if (m < 1 || dim < 1) throw std::invalid_argument("regular_grid: bad size");
  Index n = 1;
  for (Index a = 0; a < dim; ++a) n *= m;
  Matrix<Scalar> c(dim, n);
  for (Index k = 0; k < n; ++k) {
    Index cell = k;
    for (Index a = 0; a < dim; ++a) {
      c(a, k) = (static_cast<Scalar>(cell % m) + offset) / static_cast<Scalar>(m);
      cell /= m;
    }
  }
  return PointSet<Scalar>(std::move(c), domain);
}

/// Points drawn with probability proportional to pixel density (rejection
/// sampling), jittered uniformly inside the chosen pixel. 2D, toroidal.
PointSetd weighted_random_init(const DensityMap& density, Index n, Seed seed);

/// Global toroidal shift, the randomization used for integration.
template <typename Scalar>
PointSet<Scalar> toroidal_shift(const PointSet<Scalar>& p,
                                const Vector<Scalar>& offset) {
  if (offset.size() != p.dim())
    throw std::invalid_argument("toroidal_shift: dimension mismatch");
  Matrix<Scalar> c = p.coords();
  c.colwise() += offset;
  return PointSet<Scalar>::fit(std::move(c), Domain::toroidal);
}

}  // namespace gbn
