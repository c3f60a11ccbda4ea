#include "gbn/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace gbn {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// Next header token of a PGM, skipping whitespace and comments.
long pgm_token(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw IoError("pgm: malformed header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > (1L << 30)) throw IoError("pgm: header value too large");
    c = in.get();
  }
  return v;  // the single whitespace after the token is consumed
}

}  // namespace

PointSetd read_points(std::istream& in, Domain domain) {
  std::vector<double> vals;
  Index dim = 0, n = 0;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    Index cols = 0;
    double v;
    while (ls >> v) {
      vals.push_back(v);
      ++cols;
    }
    if (!ls.eof()) throw IoError("points: bad number on line " + std::to_string(lineno));
    if (cols == 0) continue;
    if (dim == 0) dim = cols;
    if (cols != dim) throw IoError("points: ragged row on line " + std::to_string(lineno));
    ++n;
  }
  if (n == 0) throw IoError("points: no points");
  Matrix<double> x = Eigen::Map<Matrix<double>>(vals.data(), dim, n);
  for (Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x(i))) throw IoError("points: non-finite coordinate");
  return PointSetd::fit(std::move(x), domain);
}

PointSetd read_points(const std::string& path, Domain domain) {
  auto in = open_in(path);
  return read_points(in, domain);
}

void write_points(std::ostream& out, const PointSetd& points, const std::string& comment) {
  if (!comment.empty()) {
    std::istringstream cs(comment);
    std::string l;
    while (std::getline(cs, l)) out << "# " << l << '\n';
  }
  char buf[32];
  const auto& x = points.coords();
  for (Index k = 0; k < x.cols(); ++k) {
    for (Index a = 0; a < x.rows(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", x(a, k));
      if (a) out << ' ';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("points: write failed");
}

void write_points(const std::string& path, const PointSetd& points, const std::string& comment) {
  auto out = open_out(path);
  write_points(out, points, comment);
}

Eigen::ArrayXXd read_pgm(std::istream& in) {
  char m[2];
  if (!in.read(m, 2) || m[0] != 'P' || (m[1] != '2' && m[1] != '5'))
    throw IoError("pgm: not a P2/P5 file");
  const long w = pgm_token(in), h = pgm_token(in), maxval = pgm_token(in);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw IoError("pgm: bad header values");
  Eigen::ArrayXXd img(h, w);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (m[1] == '5') {
    const long bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<std::size_t>(w * h * bytes));
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw IoError("pgm: truncated data");
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>((r * w + c) * bytes);
        const long v = bytes == 1 ? raw[i] : (raw[i] << 8) | raw[i + 1];
        if (v > maxval) throw IoError("pgm: value above maxval");
        img(r, c) = static_cast<double>(v) * scale;
      }
  } else {
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        long v;
        if (!(in >> v) || v < 0 || v > maxval) throw IoError("pgm: bad or missing value");
        img(r, c) = static_cast<double>(v) * scale;
      }
  }
  return img;
}

Eigen::ArrayXXd read_pgm(const std::string& path) {
  auto in = open_in(path);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const Eigen::ArrayXXd& image, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("write_pgm: bits must be 8 or 16");
  if (image.size() == 0) throw std::invalid_argument("write_pgm: empty image");
  const long maxval = bits == 8 ? 255 : 65535;
  out << "P5\n" << image.cols() << ' ' << image.rows() << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(image.size() * (bits / 8)));
  for (Index r = 0; r < image.rows(); ++r)
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::isfinite(image(r, c)) ? std::clamp(image(r, c), 0.0, 1.0) : 0.0;
      const auto q = static_cast<long>(std::lround(v * static_cast<double>(maxval)));
      if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
      raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("pgm: write failed");
}

void write_pgm(const std::string& path, const Eigen::ArrayXXd& image, int bits) {
  auto out = open_out(path);
  write_pgm(out, image, bits);
}

DensityMap density_from_gray(const Eigen::ArrayXXd& gray) {
  return DensityMap((1.0 - gray).max(0.0).min(1.0));
}

}  // namespace gbn
