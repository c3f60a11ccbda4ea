#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "gbn/core.hpp"

namespace gbn {

/// Thrown for unreadable or malformed files.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Point text format: one point per line, whitespace-separated decimals,
/// '#' starts a comment. The dimension is the column count of the first row.
PointSetd read_points(std::istream& in, Domain domain = Domain::toroidal);
PointSetd read_points(const std::string& path, Domain domain = Domain::toroidal);

/// Writes %.17g coordinates, so reading back is lossless.
void write_points(std::ostream& out, const PointSetd& points, const std::string& comment = {});
void write_points(const std::string& path, const PointSetd& points,
                  const std::string& comment = {});

/// Grayscale PGM (P2 or P5, maxval up to 65535) as values in [0, 1],
/// 0 = black. Row 0 is the first row in the file.
Eigen::ArrayXXd read_pgm(std::istream& in);
Eigen::ArrayXXd read_pgm(const std::string& path);

/// Binary PGM (P5) of values clamped to [0, 1]; bits is 8 or 16.
void write_pgm(std::ostream& out, const Eigen::ArrayXXd& image, int bits = 16);
void write_pgm(const std::string& path, const Eigen::ArrayXXd& image, int bits = 16);

/// Stippling convention: dark pixels are dense, density = 1 - gray.
DensityMap density_from_gray(const Eigen::ArrayXXd& gray);

}  // namespace gbn
