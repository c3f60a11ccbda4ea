#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gbn/core.hpp"
#include "gbn/fast_exp.hpp"

namespace gbn {

enum class PairGeometry { toroidal, plain };

/// Options for pair_sums. energy_var is the variance of the unshaped kernel;
/// with shapes a, pair (i,j) uses a_ij = 2 a_i a_j / (a_i + a_j) and the kernel
/// a_ij exp(-a_ij r^2 / (2 energy_var)).
template <typename Scalar>
struct PairOptions {
  PairGeometry geometry = PairGeometry::toroidal;
  Scalar energy_var = 0;
  int periods = 1;
  const Vector<Scalar>* shapes = nullptr;
  /// Pairs whose nearest-image distance exceeds this are ignored.
  std::optional<Scalar> cutoff;
};

/// Accumulated pair interactions, all without physical prefactors.
///   direction(:,i) = sum_j w_ij^2 s(x_i - x_j)   (s = slope products)
///   mass(i)        = sum_j w_ij^2 e(x_i - x_j)
///   energy         = sum_{i<j} w_ij e(x_i - x_j)
/// with w = 1 for unshaped kernels. direction is -energy_var times the
/// gradient of sum_j w e with respect to x_i.
template <typename Scalar>
struct PairSums {
  Matrix<Scalar> direction;
  Vector<Scalar> mass;
  Scalar energy = 0;
};

namespace detail {

inline constexpr Index kPairChunk = 64;

inline Index pair_block(Index n) {
  Index b = std::max<Index>(256, (n + 63) / 64);
  return (b + 7) / 8 * 8;
}

template <typename Scalar, bool Shaped, PairGeometry Geo>
void pair_row(const Matrix<Scalar>& xt, const PairOptions<Scalar>& opt, Index i0,
              Index i1, Matrix<Scalar>& dir, Vector<Scalar>& mass,
              Matrix<Scalar>& jdir, Vector<Scalar>& jmass, Scalar& energy) {
  constexpr Index C = kPairChunk;
  const Index n = xt.rows();
  const Index d = xt.cols();
  const Scalar c0 = Scalar(-0.5) / opt.energy_var;
  const int P = Geo == PairGeometry::toroidal ? opt.periods : 1;
  const bool cut = opt.cutoff.has_value();
  const Scalar cut2 = cut ? *opt.cutoff * *opt.cutoff : Scalar(0);

  std::vector<Scalar> xs(d * C), val(d * C), slope(d * C), g(d * C);
  alignas(64) Scalar pre[C], suf[C], cc[C], we[C], wd[C];
  Scalar esum = 0;

  for (Index i = i0; i < i1; ++i) {
    const Scalar ai = Shaped ? (*opt.shapes)(i) : Scalar(1);
    Scalar mi = 0;
    for (Index a = 0; a < d; ++a) dir(a, i) = 0;
    for (Index j0 = i + 1; j0 < n; j0 += C) {
      const Index len = std::min(C, n - j0);
      for (Index a = 0; a < d; ++a) {
        const Scalar xi = xt(i, a);
        const Scalar* col = xt.col(a).data() + j0;
        Scalar* x = xs.data() + a * C;
#pragma omp simd
        for (Index t = 0; t < len; ++t) {
          Scalar u = xi - col[t];
          if constexpr (Geo == PairGeometry::toroidal) u = u < 0 ? u + 1 : u;
          x[t] = u;
        }
      }
      if constexpr (Shaped) {
        const Scalar* aj = opt.shapes->data() + j0;
#pragma omp simd
        for (Index t = 0; t < len; ++t) {
          const Scalar w = 2 * ai * aj[t] / (ai + aj[t]);
          cc[t] = w * c0;
          we[t] = w;
          wd[t] = w * w;
        }
      } else {
        for (Index t = 0; t < len; ++t) cc[t] = c0;
      }
      if (cut) {
        for (Index t = 0; t < len; ++t) pre[t] = 0;
        for (Index a = 0; a < d; ++a) {
          const Scalar* x = xs.data() + a * C;
#pragma omp simd
          for (Index t = 0; t < len; ++t) {
            Scalar u = x[t];
            if constexpr (Geo == PairGeometry::toroidal) u = std::min(u, 1 - u);
            pre[t] += u * u;
          }
        }
        for (Index t = 0; t < len; ++t) {
          const Scalar m = pre[t] <= cut2 ? Scalar(1) : Scalar(0);
          if constexpr (Shaped) {
            we[t] *= m;
            wd[t] *= m;
          } else {
            we[t] = m;
            wd[t] = m;
          }
        }
      }
      for (Index a = 0; a < d; ++a) {
        const Scalar* x = xs.data() + a * C;
        Scalar* v = val.data() + a * C;
        Scalar* s = slope.data() + a * C;
        if constexpr (Geo == PairGeometry::toroidal) {
          for (Index t = 0; t < len; ++t) v[t] = s[t] = 0;
          for (int k = 1 - P; k <= P; ++k) {
            const Scalar kk = static_cast<Scalar>(k);
#pragma omp simd
            for (Index t = 0; t < len; ++t) {
              const Scalar u = x[t] - kk;
              const Scalar e = fast_exp(u * u * cc[t]);
              v[t] += e;
              s[t] += u * e;
            }
          }
        } else {
#pragma omp simd
          for (Index t = 0; t < len; ++t) {
            const Scalar e = fast_exp(x[t] * x[t] * cc[t]);
            v[t] = e;
            s[t] = x[t] * e;
          }
        }
      }
      // slope_r * prod_{m != r} val_m via prefix and suffix products
      for (Index t = 0; t < len; ++t) pre[t] = suf[t] = 1;
      for (Index a = 0; a < d; ++a) {
        const Scalar* v = val.data() + a * C;
        const Scalar* s = slope.data() + a * C;
        Scalar* gg = g.data() + a * C;
#pragma omp simd
        for (Index t = 0; t < len; ++t) {
          gg[t] = pre[t] * s[t];
          pre[t] *= v[t];
        }
      }
      for (Index a = d - 1; a >= 0; --a) {
        const Scalar* v = val.data() + a * C;
        Scalar* gg = g.data() + a * C;
#pragma omp simd
        for (Index t = 0; t < len; ++t) {
          gg[t] *= suf[t];
          suf[t] *= v[t];
        }
      }
      if (Shaped || cut) {
#pragma omp simd
        for (Index t = 0; t < len; ++t) {
          suf[t] = pre[t] * we[t];  // energy term
          pre[t] *= wd[t];          // mass term
        }
        for (Index a = 0; a < d; ++a) {
          Scalar* gg = g.data() + a * C;
#pragma omp simd
          for (Index t = 0; t < len; ++t) gg[t] *= wd[t];
        }
      } else {
        for (Index t = 0; t < len; ++t) suf[t] = pre[t];
      }
      Scalar m = 0, e = 0;
      Scalar* jm = jmass.data() + j0;
#pragma omp simd reduction(+ : m, e)
      for (Index t = 0; t < len; ++t) {
        m += pre[t];
        e += suf[t];
        jm[t] += pre[t];
      }
      mi += m;
      esum += e;
      for (Index a = 0; a < d; ++a) {
        const Scalar* gg = g.data() + a * C;
        Scalar* jd = jdir.col(a).data() + j0;
        Scalar acc = 0;
#pragma omp simd reduction(+ : acc)
        for (Index t = 0; t < len; ++t) {
          acc += gg[t];
          jd[t] -= gg[t];
        }
        dir(a, i) += acc;
      }
    }
    mass(i) = mi;
  }
  energy = esum;
}

// Fully fused variant for small fixed dim and replica count without cutoff;
// everything stays in registers.
template <typename Scalar, bool Shaped, PairGeometry Geo, int D, int P>
void pair_row_fused(const Matrix<Scalar>& xt, const PairOptions<Scalar>& opt,
                    Index i0, Index i1, Matrix<Scalar>& dir, Vector<Scalar>& mass,
                    Matrix<Scalar>& jdir, Vector<Scalar>& jmass, Scalar& energy) {
  const Index n = xt.rows();
  const Scalar c0 = Scalar(-0.5) / opt.energy_var;
  const Scalar* col[D];
  Scalar* jd[D];
#pragma GCC unroll 8
  for (int a = 0; a < D; ++a) {
    col[a] = xt.col(a).data();
    jd[a] = jdir.col(a).data();
  }
  Scalar* jm = jmass.data();
  const Scalar* shp = Shaped ? opt.shapes->data() : nullptr;
  Scalar esum = 0;
  for (Index i = i0; i < i1; ++i) {
    Scalar xi[D];
#pragma GCC unroll 8
    for (int a = 0; a < D; ++a) xi[a] = xt(i, a);
    const Scalar ai = Shaped ? shp[i] : Scalar(1);
    Scalar m = 0, e = 0, g0 = 0, g1 = 0, g2 = 0, g3 = 0;
#pragma omp simd reduction(+ : m, e, g0, g1, g2, g3)
    for (Index j = i + 1; j < n; ++j) {
      Scalar c = c0, we = 1, wd = 1;
      if constexpr (Shaped) {
        we = 2 * ai * shp[j] / (ai + shp[j]);
        wd = we * we;
        c = we * c0;
      }
      Scalar v[D], s[D];
#pragma GCC unroll 8
      for (int a = 0; a < D; ++a) {
        Scalar u = xi[a] - col[a][j];
        if constexpr (Geo == PairGeometry::toroidal) {
          u = u < 0 ? u + 1 : u;
          v[a] = 0;
          s[a] = 0;
#pragma GCC unroll 8
          for (int k = 1 - P; k <= P; ++k) {
            const Scalar w = u - Scalar(k);
            const Scalar ex = fast_exp(w * w * c);
            v[a] += ex;
            s[a] += w * ex;
          }
        } else {
          v[a] = fast_exp(u * u * c);
          s[a] = u * v[a];
        }
      }
      Scalar g[D];
      Scalar pre = 1;
#pragma GCC unroll 8
      for (int a = 0; a < D; ++a) {
        g[a] = pre * s[a];
        pre *= v[a];
      }
      Scalar suf = 1;
#pragma GCC unroll 8
      for (int a = D - 1; a >= 0; --a) {
        g[a] *= suf * wd;
        suf *= v[a];
      }
      const Scalar mj = pre * wd;
      m += mj;
      e += pre * we;
      jm[j] += mj;
#pragma GCC unroll 8
      for (int a = 0; a < D; ++a) jd[a][j] -= g[a];
      g0 += g[0];
      if constexpr (D > 1) g1 += g[1];
      if constexpr (D > 2) g2 += g[2];
      if constexpr (D > 3) g3 += g[3];
    }
    const Scalar gs[4] = {g0, g1, g2, g3};
#pragma GCC unroll 8
    for (int a = 0; a < D; ++a) dir(a, i) = gs[a];
    mass(i) = m;
    esum += e;
  }
  energy = esum;
}

template <typename Scalar, bool Shaped, PairGeometry Geo>
using RowFn = void (*)(const Matrix<Scalar>&, const PairOptions<Scalar>&, Index,
                       Index, Matrix<Scalar>&, Vector<Scalar>&, Matrix<Scalar>&,
                       Vector<Scalar>&, Scalar&);

template <typename Scalar, bool Shaped, PairGeometry Geo, int D>
RowFn<Scalar, Shaped, Geo> fused_for_periods(int periods) {
  if (Geo == PairGeometry::plain || periods == 1)
    return &pair_row_fused<Scalar, Shaped, Geo, D, 1>;
  if (periods == 2) return &pair_row_fused<Scalar, Shaped, Geo, D, 2>;
  return nullptr;
}

template <typename Scalar, bool Shaped, PairGeometry Geo>
RowFn<Scalar, Shaped, Geo> select_row(Index dim, const PairOptions<Scalar>& opt) {
  RowFn<Scalar, Shaped, Geo> f = nullptr;
  if (!opt.cutoff) {
    switch (dim) {
      case 1: f = fused_for_periods<Scalar, Shaped, Geo, 1>(opt.periods); break;
      case 2: f = fused_for_periods<Scalar, Shaped, Geo, 2>(opt.periods); break;
      case 3: f = fused_for_periods<Scalar, Shaped, Geo, 3>(opt.periods); break;
      case 4: f = fused_for_periods<Scalar, Shaped, Geo, 4>(opt.periods); break;
      default: break;
    }
  }
  return f ? f : &pair_row<Scalar, Shaped, Geo>;
}

template <typename Scalar, bool Shaped, PairGeometry Geo>
PairSums<Scalar> pair_sums_impl(const Matrix<Scalar>& coords,
                                const PairOptions<Scalar>& opt) {
  const auto row_fn = select_row<Scalar, Shaped, Geo>(coords.rows(), opt);
  const Index d = coords.rows();
  const Index n = coords.cols();
  const Matrix<Scalar> xt = coords.transpose();  // one contiguous column per axis
  const Index block = pair_block(n);
  const Index rows = (n + block - 1) / block;

  PairSums<Scalar> out;
  out.direction = Matrix<Scalar>::Zero(d, n);
  out.mass = Vector<Scalar>::Zero(n);
  std::vector<Matrix<Scalar>> jdir(rows);
  std::vector<Vector<Scalar>> jmass(rows);
  std::vector<Scalar> energy(rows, Scalar(0));

#pragma omp parallel for schedule(dynamic, 1)
  for (Index r = 0; r < rows; ++r) {
    jdir[r] = Matrix<Scalar>::Zero(n, d);
    jmass[r] = Vector<Scalar>::Zero(n);
    const Index i0 = r * block;
    const Index i1 = std::min(n, i0 + block);
    row_fn(xt, opt, i0, i1, out.direction, out.mass, jdir[r], jmass[r], energy[r]);
  }
  // fixed reduction order: independent of the thread count
  for (Index r = 0; r < rows; ++r) {
    out.direction += jdir[r].transpose();
    out.mass += jmass[r];
    out.energy += energy[r];
  }
  return out;
}

}  // namespace detail

/// All pairwise kernel interactions of a point set (coords is dim x n).
/// Toroidal geometry expects coordinates in [0,1) and sums replica images;
/// plain geometry uses free-space Gaussians.
template <typename Scalar>
PairSums<Scalar> pair_sums(const Matrix<Scalar>& coords,
                           const PairOptions<Scalar>& opt) {
  if (!(opt.energy_var > 0) || opt.periods < 1)
    throw std::invalid_argument("pair_sums: invalid kernel options");
  if (opt.shapes && opt.shapes->size() != coords.cols())
    throw std::invalid_argument("pair_sums: shape count mismatch");
  const bool torus = opt.geometry == PairGeometry::toroidal;
  if (opt.shapes)
    return torus ? detail::pair_sums_impl<Scalar, true, PairGeometry::toroidal>(coords, opt)
                 : detail::pair_sums_impl<Scalar, true, PairGeometry::plain>(coords, opt);
  return torus ? detail::pair_sums_impl<Scalar, false, PairGeometry::toroidal>(coords, opt)
               : detail::pair_sums_impl<Scalar, false, PairGeometry::plain>(coords, opt);
}

}  // namespace gbn
