#include "gbn/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gbn/fast_exp.hpp"
#include "gbn/pairwise.hpp"

namespace gbn {

namespace {

constexpr double kSupport = 9.0;

double axis_gap(double u, bool torus) {
  u = std::abs(u);
  return torus ? std::min(u, 1 - u) : u;
}

// One Algorithm-2 pass: d_k = sum_{l != k} a_l exp(-a_l r^2 / 2 sigma^2).
template <int D, bool Torus>
void density_rows(const Matrix<double>& xt, double c, const Eigen::VectorXd& a,
                  Eigen::VectorXd& out) {
  const Index n = xt.rows();
  const Index d = D > 0 ? D : xt.cols();
  const double* al = a.data();
  const double* cols = xt.data();  // axis m starts at cols + m n
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    double xk[8];
    const Index dk = std::min<Index>(d, 8);
    for (Index m = 0; m < dk; ++m) xk[m] = cols[m * n + k];
    double s = 0;
    if (D > 0) {
#pragma omp simd reduction(+ : s)
      for (Index l = 0; l < n; ++l) {
        double r2 = 0;
#pragma GCC unroll 8
        for (int m = 0; m < D; ++m) {
          double u = xk[m] - cols[m * n + l];
          u = u < 0 ? -u : u;
          if constexpr (Torus) u = u > 0.5 ? 1 - u : u;
          r2 += u * u;
        }
        const double v = al[l] * detail::fast_exp(c * al[l] * r2);
        s += l == k ? 0.0 : v;
      }
    } else {
      for (Index l = 0; l < n; ++l) {
        if (l == k) continue;
        double r2 = 0;
        for (Index m = 0; m < d; ++m) {
          double u = std::abs(cols[m * n + k] - cols[m * n + l]);
          if constexpr (Torus) u = std::min(u, 1 - u);
          r2 += u * u;
        }
        s += al[l] * std::exp(c * al[l] * r2);
      }
    }
    out(k) = s;
  }
}

Eigen::VectorXd density_pass(const Matrix<double>& x, bool torus, double sigma,
                             const Eigen::VectorXd& a) {
  const Matrix<double> xt = x.transpose();
  const double c = -0.5 / (sigma * sigma);
  Eigen::VectorXd out(x.cols());
  if (x.rows() == 1)
    torus ? density_rows<1, true>(xt, c, a, out) : density_rows<1, false>(xt, c, a, out);
  else if (x.rows() == 2)
    torus ? density_rows<2, true>(xt, c, a, out) : density_rows<2, false>(xt, c, a, out);
  else if (x.rows() == 3)
    torus ? density_rows<3, true>(xt, c, a, out) : density_rows<3, false>(xt, c, a, out);
  else
    torus ? density_rows<0, true>(xt, c, a, out) : density_rows<0, false>(xt, c, a, out);
  return out;
}

void apply_pass(Eigen::VectorXd& a, const Eigen::VectorXd& dens) {
  // isolated points would get a = 0, i.e. an infinitely wide kernel
  const double floor = 1e-12 * std::max(dens.maxCoeff(), 1e-300);
  a = dens.cwiseMax(floor);
  ShapeFactors s{a};
  normalize_shapes(s);
  a = s.a;
}

int shaped_periods(const KernelConfigd& kcfg, const Eigen::VectorXd& a) {
  return KernelConfigd::periods_for(kcfg.energy_var / a.minCoeff(), kcfg.support_sigmas);
}

PairSums<double> shaped_pairs(const Matrix<double>& x, const KernelConfigd& kcfg,
                              const Eigen::VectorXd& a, bool torus) {
  PairOptions<double> opt;
  opt.geometry = torus ? PairGeometry::toroidal : PairGeometry::plain;
  opt.energy_var = kcfg.energy_var;
  opt.periods = torus ? shaped_periods(kcfg, a) : 1;
  opt.shapes = &a;
  return pair_sums(x, opt);
}

struct PixelTerms {
  double energy = 0;  // sum_p b a e, no prefactor
  double mass = 0;    // sum_p b a^2 e
  Eigen::Vector2d pull = Eigen::Vector2d::Zero();  // sum_p b a^2 e (c - x)
};

// Pixels in columns [c0, c0 + len) of one row at vertical offset v; u0 is
// the horizontal offset of the first column centre.
void pixel_span(const PixelField& f, Index row, Index c0, Index len, double u0, double v,
                double ak, double c, double& e, double& m, double& px, double& py) {
  const double* amp = f.amplitude.data() + row * f.width + c0;
  const double* shp = f.shape.data() + row * f.width + c0;
  const double w = 1.0 / static_cast<double>(f.width);
  const double v2 = v * v;
  double se = 0, sm = 0, su = 0;
#pragma omp simd reduction(+ : se, sm, su)
  for (Index t = 0; t < len; ++t) {
    const double u = u0 + static_cast<double>(t) * w;
    const double ap = shp[t];
    const double akp = 2 * ak * ap / (ak + ap);
    const double g = amp[t] * akp * detail::fast_exp(c * akp * (u * u + v2));
    se += g;
    sm += akp * g;
    su += akp * g * u;
  }
  e += se;
  m += sm;
  px += su;
  py += sm * v;
}

// Point k against the pixels within 9 sigma_abs a_k^{-1/2}, toroidal.
PixelTerms pixel_terms(const PixelField& f, const KernelConfigd& kcfg, double x, double y,
                       double ak) {
  const Index W = f.width, H = f.height;
  const double reach = kSupport * kcfg.sigma_abs / std::sqrt(ak);
  const Index rx = std::min<Index>(W / 2, static_cast<Index>(std::ceil(reach * W)));
  const Index ry = std::min<Index>(H / 2, static_cast<Index>(std::ceil(reach * H)));
  const Index cx = static_cast<Index>(std::floor(x * W));
  const Index cy = static_cast<Index>(std::floor(y * H));
  const Index nx = std::min<Index>(W, 2 * rx + 1);
  const Index ny = std::min<Index>(H, 2 * ry + 1);
  // the column window splits into at most two contiguous runs
  const Index first = ((cx - rx) % W + W) % W;
  const Index len1 = std::min(nx, W - first);
  const Index len2 = nx - len1;
  // both runs continue the same unwrapped offset sequence
  const double u1 = (static_cast<double>(cx - rx) + 0.5) / W - x;
  const double u2 = u1 + static_cast<double>(len1) / W;
  const double c = -0.5 / kcfg.energy_var;
  double e = 0, m = 0, px = 0, py = 0;
  for (Index s = 0; s < ny; ++s) {
    const Index r = ((cy - ry + s) % H + H) % H;
    double v = (static_cast<double>(r) + 0.5) / H - y;
    v -= std::round(v);
    pixel_span(f, r, first, len1, u1, v, ak, c, e, m, px, py);
    if (len2 > 0) pixel_span(f, r, 0, len2, u2, v, ak, c, e, m, px, py);
  }
  PixelTerms out;
  out.energy = e;
  out.mass = m;
  out.pull << px, py;
  return out;
}

void require_2d_torus(const PointSetd& p, const char* who) {
  if (p.dim() != 2 || p.domain() != Domain::toroidal)
    throw std::invalid_argument(std::string(who) + ": 2D toroidal points required");
}

struct AdaptiveProblem {
  const KernelConfigd* kcfg;
  const PixelField* field;
  Eigen::VectorXd a, saved;

  StepEval<double> evaluate(const Matrix<double>& x) {
    apply_pass(a, density_pass(x, true, kcfg->sigma_abs, a));
    return score(x);
  }
  double energy_at(const Matrix<double>& x) const { return score(x).energy; }

  StepEval<double> score(const Matrix<double>& x) const {
    auto s = shaped_pairs(x, *kcfg, a, true);
    StepEval<double> ev;
    ev.direction = std::move(s.direction);
    ev.mass = std::move(s.mass);
    double attract = 0;
    const Index n = x.cols();
    std::vector<PixelTerms> terms(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (Index k = 0; k < n; ++k)
      terms[k] = pixel_terms(*field, *kcfg, x(0, k), x(1, k), a(k));
    for (Index k = 0; k < n; ++k) {
      attract += terms[k].energy;
      ev.direction.col(k) += terms[k].pull;
      ev.mass(k) = std::max(ev.mass(k), terms[k].mass);
    }
    ev.energy = s.energy - attract;
    return ev;
  }
  void save() { saved = a; }
  void restore() { a = saved; }
};

}  // namespace

void normalize_shapes(ShapeFactors& s) {
  const double ms = s.a.squaredNorm() / static_cast<double>(s.a.size());
  if (!(ms > 0) || !std::isfinite(ms))
    throw std::invalid_argument("normalize_shapes: degenerate shapes");
  s.a /= std::sqrt(ms);
}

ShapeFactors shape_factors(const PointSetd& points, double sigma, int iterations,
                           const ShapeFactors* init) {
  if (points.size() < 2) throw std::invalid_argument("shape_factors: need n >= 2");
  if (!(sigma > 0) || iterations < 0)
    throw std::invalid_argument("shape_factors: invalid sigma or iterations");
  Eigen::VectorXd a = Eigen::VectorXd::Ones(points.size());
  if (init) {
    if (init->a.size() != points.size())
      throw std::invalid_argument("shape_factors: init size mismatch");
    a = init->a;
  }
  const bool torus = points.domain() == Domain::toroidal;
  for (int it = 0; it < iterations; ++it)
    apply_pass(a, density_pass(points.coords(), torus, sigma, a));
  return {a};
}

PixelField PixelField::make(const DensityMap& density, Index n) {
  if (n < 1) throw std::invalid_argument("PixelField: n must be >= 1");
  PixelField f;
  f.width = density.width();
  f.height = density.height();
  const Index size = f.width * f.height;
  f.amplitude.resize(size);
  f.shape.resize(size);
  double s1 = 0, s3 = 0;
  for (Index r = 0; r < f.height; ++r)
    for (Index c = 0; c < f.width; ++c) {
      const double v = density(r, c);
      s1 += v;
      s3 += v * v * v;
    }
  const double kappa = std::sqrt(s1 / s3);
  for (Index r = 0; r < f.height; ++r)
    for (Index c = 0; c < f.width; ++c) {
      const double v = density(r, c);
      f.amplitude(r * f.width + c) = static_cast<double>(n) * v / s1;
      f.shape(r * f.width + c) = kappa * v;
    }
  return f;
}

double adaptive_energy(const AdaptiveState& s) {
  if (s.shapes.a.size() != s.points.size())
    throw std::invalid_argument("adaptive_energy: shape count mismatch");
  if (s.points.size() < 2) return 0.0;
  const auto p = shaped_pairs(s.points.coords(), s.kcfg, s.shapes.a,
                              s.points.domain() == Domain::toroidal);
  return std::numbers::pi * s.kcfg.energy_var / static_cast<double>(s.points.size()) *
         p.energy;
}

Eigen::MatrixXd adaptive_gradient(const AdaptiveState& s) {
  if (s.shapes.a.size() != s.points.size())
    throw std::invalid_argument("adaptive_gradient: shape count mismatch");
  if (s.points.size() < 2) return Eigen::MatrixXd::Zero(s.points.dim(), s.points.size());
  auto p = shaped_pairs(s.points.coords(), s.kcfg, s.shapes.a,
                        s.points.domain() == Domain::toroidal);
  return (-std::numbers::pi / static_cast<double>(s.points.size())) * p.direction;
}

double pixel_energy(const AdaptiveState& s, const PixelField& field) {
  require_2d_torus(s.points, "pixel_energy");
  double e = 0;
  for (Index k = 0; k < s.points.size(); ++k)
    e += pixel_terms(field, s.kcfg, s.points(0, k), s.points(1, k), s.shapes.a(k))
             .energy;
  return -std::numbers::pi * s.kcfg.energy_var / static_cast<double>(s.points.size()) * e;
}

Eigen::VectorXd pixel_attraction(const AdaptiveState& s, const PixelField& field, Index k) {
  require_2d_torus(s.points, "pixel_attraction");
  const auto t =
      pixel_terms(field, s.kcfg, s.points(0, k), s.points(1, k), s.shapes.a(k));
  return std::numbers::pi / static_cast<double>(s.points.size()) * t.pull;
}

std::tuple<PointSetd, ShapeFactors, OptimizeTrace> optimize_adaptive(
    const DensityMap& density, Index n, const KernelConfigd& kcfg,
    const OptimizeConfig& ocfg) {
  if (n < 2) throw std::invalid_argument("optimize_adaptive: need n >= 2");
  const auto start = weighted_random_init(density, n, ocfg.seed);
  const PixelField field = PixelField::make(density, n);
  AdaptiveProblem problem{&kcfg, &field, Eigen::VectorXd::Ones(n), {}};
  auto [x, trace] = descend(start.coords(), Domain::toroidal, ocfg, problem);
  return {PointSetd(std::move(x), Domain::toroidal), ShapeFactors{problem.a},
          std::move(trace)};
}

Eigen::ArrayXXd reconstruct(const PointSetd& points, const ShapeFactors& shapes,
                            const KernelConfigd& kcfg, Index width, Index height,
                            std::optional<double> target_mean) {
  require_2d_torus(points, "reconstruct");
  if (width < 1 || height < 1) throw std::invalid_argument("reconstruct: bad size");
  if (shapes.a.size() != points.size())
    throw std::invalid_argument("reconstruct: shape count mismatch");
  const double s2 = kcfg.sigma_abs * kcfg.sigma_abs;
  Eigen::ArrayXXd img = Eigen::ArrayXXd::Zero(height, width);
  for (Index k = 0; k < points.size(); ++k) {
    const double ak = shapes.a(k);
    const double reach = kSupport * kcfg.sigma_abs / std::sqrt(ak);
    const Index rx = std::min<Index>(width / 2, static_cast<Index>(std::ceil(reach * width)));
    const Index ry = std::min<Index>(height / 2, static_cast<Index>(std::ceil(reach * height)));
    const double x = points(0, k), y = points(1, k);
    const Index cx = static_cast<Index>(std::floor(x * width));
    const Index cy = static_cast<Index>(std::floor(y * height));
    const Index nx = std::min<Index>(width, 2 * rx + 1);
    const Index ny = std::min<Index>(height, 2 * ry + 1);
    for (Index s = 0; s < ny; ++s) {
      const Index r = ((cy - ry + s) % height + height) % height;
      double v = (static_cast<double>(r) + 0.5) / height - y;
      v -= std::round(v);
      for (Index t = 0; t < nx; ++t) {
        const Index c = ((cx - rx + t) % width + width) % width;
        double u = (static_cast<double>(c) + 0.5) / width - x;
        u -= std::round(u);
        img(r, c) += ak * std::exp(-ak * (u * u + v * v) / (2 * s2));
      }
    }
  }
  if (target_mean) {
    const double m = img.mean();
    if (m > 0) img *= *target_mean / m;
  } else {
    const double mx = img.maxCoeff();
    if (mx > 0) img /= mx;
  }
  return img;
}

Eigen::ArrayXXd blur(const Eigen::ArrayXXd& image, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("blur: sigma must be > 0");
  const Index H = image.rows(), W = image.cols();
  auto kernel = [&](Index size) {
    // weights for offsets 0..size-1, wrapped to the nearest image
    Eigen::ArrayXd w(size);
    for (Index o = 0; o < size; ++o) {
      const double u = axis_gap(static_cast<double>(o) / size, true);
      w(o) = std::exp(-u * u / (2 * sigma * sigma));
    }
    return w / w.sum();
  };
  const Eigen::ArrayXd kx = kernel(W), ky = kernel(H);
  Eigen::ArrayXXd tmp = Eigen::ArrayXXd::Zero(H, W), out = Eigen::ArrayXXd::Zero(H, W);
  for (Index r = 0; r < H; ++r)
    for (Index c = 0; c < W; ++c) {
      double s = 0;
      for (Index o = 0; o < W; ++o) s += kx(o) * image(r, (c + o) % W);
      tmp(r, c) = s;
    }
  for (Index r = 0; r < H; ++r)
    for (Index c = 0; c < W; ++c) {
      double s = 0;
      for (Index o = 0; o < H; ++o) s += ky(o) * tmp((r + o) % H, c);
      out(r, c) = s;
    }
  return out;
}

}  // namespace gbn
