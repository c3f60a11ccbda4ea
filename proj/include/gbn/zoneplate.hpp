#pragma once

#include <Eigen/Dense>

#include "gbn/core.hpp"

namespace gbn {

/// sin(k |x|^2), rings around the origin. The local frequency at radius r is
/// k r / pi cycles per unit.
inline double zoneplate_value(double x, double y, double k) { return std::sin(k * (x * x + y * y)); }

/// Chirp rate k = 2 pi sqrt(n): the local frequency reaches twice the
/// nominal sampling frequency at r = 1 and the Nyquist limit sqrt(n) / 2 at
/// r = 1/4. A regular sqrt(n) x sqrt(n) grid aliases this chirp into replica
/// zoneplates centred at multiples of (1/2, 1/2).
double default_chirp(Index n);

/// Samples the zoneplate at 2D points and splats the samples with normalized
/// Gaussian weights exp(-r^2 / 2 s^2), plain distances. Output is
/// (1 + v) / 2 in [0, 1], rows = y, pixel centres ((col + 0.5) / res, (row + 0.5) / res).
/// Pixels with no point within 4 s are 1/2.
Eigen::ArrayXXd render_zoneplate(const PointSetd& points, Index resolution, double k,
                                 double splat_sigma);

/// Amplitude of rings of chirp rate k centred at (cx, cy) within radius
/// r_max: 2 |mean((img - mean) exp(i k |x - c|^2))| over the pixels of that
/// disc. A perfect reconstruction of the zoneplate gives about 1/2 at the origin.
double ring_contrast(const Eigen::ArrayXXd& image, double cx, double cy, double k, double r_max);

}  // namespace gbn
