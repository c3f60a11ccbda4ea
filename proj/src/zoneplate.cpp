#include "gbn/zoneplate.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace gbn {

double default_chirp(Index n) {
  if (n < 1) throw std::invalid_argument("default_chirp: n must be >= 1");
  return 2 * std::numbers::pi * std::sqrt(static_cast<double>(n));
}

Eigen::ArrayXXd render_zoneplate(const PointSetd& points, Index resolution, double k,
                                 double splat_sigma) {
  if (points.dim() != 2) throw std::invalid_argument("render_zoneplate: 2D points required");
  if (resolution < 1) throw std::invalid_argument("render_zoneplate: bad resolution");
  if (!(splat_sigma > 0)) throw std::invalid_argument("render_zoneplate: splat sigma must be > 0");
  const double res = static_cast<double>(resolution);
  Eigen::ArrayXXd num = Eigen::ArrayXXd::Zero(resolution, resolution);
  Eigen::ArrayXXd den = num;
  const double c = -0.5 / (splat_sigma * splat_sigma);
  const Index reach = static_cast<Index>(std::ceil(4 * splat_sigma * res));
  const auto& x = points.coords();
  for (Index p = 0; p < x.cols(); ++p) {
    const double px = x(0, p), py = x(1, p);
    const double z = zoneplate_value(px, py, k);
    const Index cx = static_cast<Index>(std::floor(px * res));
    const Index cy = static_cast<Index>(std::floor(py * res));
    for (Index r = std::max<Index>(0, cy - reach); r <= std::min(resolution - 1, cy + reach); ++r) {
      const double dy = (static_cast<double>(r) + 0.5) / res - py;
      for (Index q = std::max<Index>(0, cx - reach); q <= std::min(resolution - 1, cx + reach);
           ++q) {
        const double dx = (static_cast<double>(q) + 0.5) / res - px;
        const double w = std::exp(c * (dx * dx + dy * dy));
        num(r, q) += w * z;
        den(r, q) += w;
      }
    }
  }
  Eigen::ArrayXXd img(resolution, resolution);
  for (Index i = 0; i < img.size(); ++i)
    img(i) = den(i) > 1e-300 ? 0.5 * (1 + num(i) / den(i)) : 0.5;
  return img;
}

double ring_contrast(const Eigen::ArrayXXd& image, double cx, double cy, double k, double r_max) {
  const Index H = image.rows(), W = image.cols();
  double sum = 0;
  Index m = 0;
  std::complex<double> acc = 0;
  for (int pass = 0; pass < 2; ++pass)
    for (Index r = 0; r < H; ++r)
      for (Index q = 0; q < W; ++q) {
        const double dx = (static_cast<double>(q) + 0.5) / W - cx;
        const double dy = (static_cast<double>(r) + 0.5) / H - cy;
        const double r2 = dx * dx + dy * dy;
        if (r2 > r_max * r_max) continue;
        if (pass == 0) {
          sum += image(r, q);
          ++m;
        } else {
          acc += (image(r, q) - sum / static_cast<double>(m)) * std::polar(1.0, k * r2);
        }
      }
  if (m == 0) throw std::invalid_argument("ring_contrast: no pixels in the disc");
  return 2 * std::abs(acc) / static_cast<double>(m);
}

}  // namespace gbn
