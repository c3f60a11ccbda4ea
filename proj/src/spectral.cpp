#include "gbn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gbn {

namespace {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

Index lattice_size(Index side, Index dim) {
  double total = 1;
  Index l = 1;
  for (Index a = 0; a < dim; ++a) {
    total *= static_cast<double>(side);
    l *= side;
  }
  if (total > static_cast<double>(Index{1} << 28))
    throw std::invalid_argument("periodogram: frequency lattice too large");
  return l;
}

template <typename Fn>
void for_each_frequency(const Periodogram& p, Fn&& fn) {
  const Index side = p.side();
  Eigen::Array<Index, Eigen::Dynamic, 1> f =
      Eigen::Array<Index, Eigen::Dynamic, 1>::Constant(p.dim, -p.fmax);
  for (Index i = 0; i < p.size(); ++i) {
    Index r2 = 0;
    for (Index a = 0; a < p.dim; ++a) r2 += f(a) * f(a);
    fn(i, r2, f);
    for (Index a = 0; a < p.dim; ++a) {
      if (++f(a) <= p.fmax) break;
      f(a) = -p.fmax;
    }
  }
  (void)side;
}

void check_compatible(const Periodogram& a, const Periodogram& b) {
  if (a.dim != b.dim || a.fmax != b.fmax || a.n != b.n)
    throw std::invalid_argument("periodogram: shape mismatch");
}

}  // namespace

Eigen::Array<Index, Eigen::Dynamic, 1> Periodogram::frequency(Index flat) const {
  Eigen::Array<Index, Eigen::Dynamic, 1> f(dim);
  for (Index a = 0; a < dim; ++a) {
    f(a) = flat % side() - fmax;
    flat /= side();
  }
  return f;
}

Index Periodogram::flat_index(std::span<const Index> f) const {
  if (static_cast<Index>(f.size()) != dim)
    throw std::invalid_argument("Periodogram: dimension mismatch");
  Index flat = 0;
  for (Index a = dim - 1; a >= 0; --a) {
    if (f[a] < -fmax || f[a] > fmax)
      throw std::out_of_range("Periodogram: frequency outside lattice");
    flat = flat * side() + (f[a] + fmax);
  }
  return flat;
}

Index default_fmax(Index n, Index dim) {
  if (n < 1 || dim < 1) throw std::invalid_argument("default_fmax: bad size");
  return static_cast<Index>(
      std::ceil(2.0 * std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim)) -
                1e-9));
}

Periodogram periodogram(const PointSetd& points, Index fmax) {
  if (fmax < 1) throw std::invalid_argument("periodogram: fmax must be >= 1");
  const Index d = points.dim();
  const Index n = points.size();
  const Index side = 2 * fmax + 1;
  const Index total = lattice_size(side, d);
  Index lead = 1;  // lattice points over the first d-1 axes
  for (Index a = 0; a + 1 < d; ++a) lead *= side;

  // phase tables, one n x side block per axis: exp(-2 pi i f x)
  std::vector<CMatrix> table(d);
  for (Index a = 0; a < d; ++a) {
    table[a].resize(n, side);
    for (Index k = 0; k < n; ++k) {
      const double x = points(a, k);
      for (Index f = -fmax; f <= fmax; ++f) {
        // reduce f x mod 1 first so large f keep full accuracy
        const double fx = static_cast<double>(f) * x;
        const double t = fx - std::round(fx);
        table[a](k, f + fmax) = std::polar(1.0, -2.0 * std::numbers::pi * t);
      }
    }
  }
  const CMatrix last = table[d - 1].rightCols(fmax + 1);  // f_last >= 0

  Periodogram out;
  out.dim = d;
  out.fmax = fmax;
  out.n = n;
  out.power = Eigen::ArrayXd::Zero(total);

  const Index chunk = std::max<Index>(1, std::min<Index>(lead, (Index{1} << 22) / n));
  const Index chunks = (lead + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic, 1)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * chunk;
    const Index rows = std::min(chunk, lead - r0);
    CMatrix lhs(rows, n);
    for (Index r = 0; r < rows; ++r) {
      Index digits = r0 + r;
      for (Index k = 0; k < n; ++k) lhs(r, k) = 1.0;
      for (Index a = 0; a + 1 < d; ++a) {
        const Index fa = digits % side;
        digits /= side;
        lhs.row(r) = lhs.row(r).cwiseProduct(table[a].col(fa).transpose());
      }
    }
    const CMatrix prod = lhs * last;
    for (Index f = 0; f <= fmax; ++f)
      for (Index r = 0; r < rows; ++r)
        out.power(r0 + r + (f + fmax) * lead) =
            std::norm(prod(r, f)) / static_cast<double>(n);
  }
  for (Index i = 0; i < total / 2; ++i) out.power(i) = out.power(total - 1 - i);
  out.power(total / 2) = static_cast<double>(n);
  return out;
}

Periodogram average(std::span<const Periodogram> items) {
  if (items.empty()) throw std::invalid_argument("average: no periodograms");
  Periodogram out = items.front();
  Index reps = items.front().realizations;
  out.power *= static_cast<double>(reps);
  for (std::size_t k = 1; k < items.size(); ++k) {
    check_compatible(out, items[k]);
    out.power += items[k].power * static_cast<double>(items[k].realizations);
    reps += items[k].realizations;
  }
  out.power /= static_cast<double>(reps);
  out.realizations = reps;
  return out;
}

RadialProfile radial_profile(const Periodogram& p, std::optional<Index> max_r2) {
  const Index top = max_r2.value_or(p.dim * p.fmax * p.fmax);
  std::vector<double> sum(static_cast<std::size_t>(top) + 1, 0.0);
  std::vector<Index> count(static_cast<std::size_t>(top) + 1, 0);
  for_each_frequency(p, [&](Index i, Index r2, const auto&) {
    if (r2 == 0 || r2 > top) return;
    sum[r2] += p.power(i);
    ++count[r2];
  });
  RadialProfile rp;
  for (Index r2 = 1; r2 <= top; ++r2) {
    if (count[r2] == 0) continue;
    rp.entries.push_back({r2, std::sqrt(static_cast<double>(r2)),
                          sum[r2] / static_cast<double>(count[r2]), count[r2]});
  }
  try {
    rp.eps_estimate = noise_floor(rp, p.n, p.dim);
  } catch (const std::invalid_argument&) {
    rp.eps_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return rp;
}

std::vector<AnnulusEntry> annulus_profile(const Periodogram& p, double width) {
  if (!(width > 0)) throw std::invalid_argument("annulus_profile: width must be > 0");
  const double rmax = std::sqrt(static_cast<double>(p.dim)) * static_cast<double>(p.fmax);
  const auto bins = static_cast<std::size_t>(std::floor(rmax / width)) + 1;
  std::vector<double> sum(bins, 0.0);
  std::vector<Index> count(bins, 0);
  for_each_frequency(p, [&](Index i, Index r2, const auto&) {
    if (r2 == 0) return;
    const auto b = static_cast<std::size_t>(std::sqrt(static_cast<double>(r2)) / width);
    sum[b] += p.power(i);
    ++count[b];
  });
  std::vector<AnnulusEntry> out;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    out.push_back({static_cast<double>(b) * width, static_cast<double>(b + 1) * width,
                   sum[b] / static_cast<double>(count[b]), count[b]});
  }
  return out;
}

std::vector<AnisotropyEntry> anisotropy(const Periodogram& p) {
  const Index top = p.dim * p.fmax * p.fmax;
  std::vector<double> s1(static_cast<std::size_t>(top) + 1, 0.0);
  std::vector<double> s2(s1.size(), 0.0);
  std::vector<Index> count(s1.size(), 0);
  const Index half = p.size() / 2;  // indices above the centre mirror those below
  for_each_frequency(p, [&](Index i, Index r2, const auto&) {
    if (i <= half) return;
    const double v = p.power(i);
    s1[r2] += v;
    s2[r2] += v * v;
    ++count[r2];
  });
  std::vector<AnisotropyEntry> out;
  for (Index r2 = 1; r2 <= top; ++r2) {
    const Index m = count[r2];
    if (m < 2) continue;
    const double mean = s1[r2] / static_cast<double>(m);
    const double var =
        std::max(0.0, (s2[r2] - static_cast<double>(m) * mean * mean) /
                          static_cast<double>(m - 1));
    const double rel = mean > 0 ? var / (mean * mean) : 0.0;
    out.push_back({r2, std::sqrt(static_cast<double>(r2)),
                   10.0 * std::log10(std::max(rel, 1e-300)), m});
  }
  return out;
}

double anisotropy_baseline(Index realizations) {
  if (realizations < 1) throw std::invalid_argument("anisotropy_baseline: R >= 1");
  return -10.0 * std::log10(static_cast<double>(realizations));
}

double pooled_anisotropy(const Periodogram& p, double r_lo, double r_hi) {
  double num = 0, den = 0;
  for (const auto& e : anisotropy(p)) {
    if (e.r < r_lo || e.r > r_hi) continue;
    const double dof = static_cast<double>(e.distinct - 1);
    num += dof * std::pow(10.0, e.db / 10.0);
    den += dof;
  }
  if (den == 0) throw std::invalid_argument("pooled_anisotropy: no rings in range");
  return 10.0 * std::log10(num / den);
}

Periodogram filtered_power(const Periodogram& p, double sigma_rel) {
  Periodogram out = p;
  if (sigma_rel == 0) return out;
  const double h = std::pow(static_cast<double>(p.n), -1.0 / static_cast<double>(p.dim));
  const double w = 2.0 * std::numbers::pi * h;
  for_each_frequency(p, [&](Index i, Index r2, const auto&) {
    out.power(i) *= std::exp(-sigma_rel * sigma_rel * w * w * static_cast<double>(r2));
  });
  return out;
}

double noise_floor(const RadialProfile& rp, Index n, Index dim) {
  const double rmax =
      0.25 * std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim));
  double sum = 0;
  Index bins = 0;
  for (const auto& e : rp.entries) {
    if (e.r > rmax) continue;
    sum += e.mean_power;
    ++bins;
  }
  if (bins == 0) throw std::invalid_argument("noise_floor: empty low-frequency band");
  return sum / static_cast<double>(bins);
}

LogFit fit_log_profile(const RadialProfile& rp, Index r2_lo, Index r2_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  Index m = 0;
  for (const auto& e : rp.entries) {
    if (e.r2 < r2_lo || e.r2 > r2_hi || !(e.mean_power > 0)) continue;
    const double x = static_cast<double>(e.r2);
    const double y = std::log(e.mean_power);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  if (m < 3) throw std::invalid_argument("fit_log_profile: fewer than 3 rings");
  const double mm = static_cast<double>(m);
  const double vx = sxx - sx * sx / mm;
  const double vy = syy - sy * sy / mm;
  const double cxy = sxy - sx * sy / mm;
  LogFit fit;
  fit.slope = cxy / vx;
  fit.log_eps = (sy - fit.slope * sx) / mm;
  fit.r_squared = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  fit.bins = m;
  return fit;
}

double min_toroidal_distance(const PointSetd& points) {
  if (points.size() < 2)
    throw std::invalid_argument("min_toroidal_distance: need at least 2 points");
  const Index d = points.dim();
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < points.size(); ++i) {
    for (Index j = i + 1; j < points.size(); ++j) {
      double r2 = 0;
      for (Index a = 0; a < d; ++a) {
        double u = std::abs(points(a, i) - points(a, j));
        u = std::min(u, 1.0 - u);
        r2 += u * u;
      }
      best = std::min(best, r2);
    }
  }
  return std::sqrt(best);
}

}  // namespace gbn
