#include "gbn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "gbn/io.hpp"
#include "gbn/kernel.hpp"
#include "gbn/uniform.hpp"

namespace gbn {

namespace {

constexpr Index kCenters = 64;
constexpr Index kMaxHalfspaceDim = 24;

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  std::uint64_t z = detail::mix64(seed + detail::kGolden * (a + 1));
  z = detail::mix64(z ^ (b * 0xd1b54a32d192ed03ULL));
  return detail::mix64(z ^ (c * 0x8cb92ba72f3d8dd7ULL));
}

}  // namespace

const char* to_string(IntegrandKind k) {
  return k == IntegrandKind::gaussian_sum ? "gaussian_sum" : "halfspace";
}

const char* to_string(Sampler s) {
  switch (s) {
    case Sampler::gbn: return "gbn";
    case Sampler::random: return "random";
    case Sampler::stratified: return "stratified";
  }
  return "?";
}

IntegrandKind parse_integrand(const std::string& s) {
  if (s == "gaussian_sum") return IntegrandKind::gaussian_sum;
  if (s == "halfspace") return IntegrandKind::halfspace;
  throw std::invalid_argument("unknown integrand family: " + s);
}

Sampler parse_sampler(const std::string& s) {
  if (s == "gbn") return Sampler::gbn;
  if (s == "random") return Sampler::random;
  if (s == "stratified") return Sampler::stratified;
  throw std::invalid_argument("unknown sampler: " + s);
}

double IntegrandSpec::operator()(const Eigen::Ref<const Vector<double>>& x) const {
  if (kind == IntegrandKind::halfspace) return normal.dot(x - anchor) <= 0 ? 1.0 : 0.0;
  const double s2 = sigma_prime * sigma_prime;
  double f = 0;
  for (Index c = 0; c < centers.cols(); ++c) {
    double v = 1;
    for (Index a = 0; a < dim && v > 0; ++a)
      v *= axis_replica_eval(toroidal_wrap(x(a) - centers(a, c)), s2, periods).value;
    f += v;
  }
  return f;
}

IntegrandSpec make_gaussian_sum(Index dim, Seed seed) {
  if (dim < 1) throw std::invalid_argument("make_gaussian_sum: dim must be >= 1");
  IntegrandSpec s;
  s.kind = IntegrandKind::gaussian_sum;
  s.dim = dim;
  s.sigma_prime = std::pow(512.0, -1.0 / static_cast<double>(dim));
  s.periods = KernelConfigd::periods_for(s.sigma_prime * s.sigma_prime);
  s.centers.resize(dim, kCenters);
  Rng rng(seed, 0);
  for (Index i = 0; i < s.centers.size(); ++i) s.centers(i) = rng.uniform();
  s.exact_integral = static_cast<double>(kCenters) *
                     std::pow(std::sqrt(2 * std::numbers::pi) * s.sigma_prime,
                              static_cast<double>(dim));
  return s;
}

double halfspace_volume(const Vector<double>& anchor, const Vector<double>& normal) {
  if (anchor.size() != normal.size())
    throw std::invalid_argument("halfspace: anchor and normal differ in size");
  const double nmax = normal.cwiseAbs().maxCoeff();
  if (!(nmax > 0)) throw std::invalid_argument("halfspace: zero normal");
  // reflect axes with negative components, drop axes the plane is parallel to
  double t = normal.dot(anchor) / nmax;
  std::vector<double> c;
  for (Index a = 0; a < normal.size(); ++a) {
    const double v = normal(a) / nmax;
    if (std::abs(v) < 1e-6) continue;
    if (v < 0) t -= v;
    c.push_back(std::abs(v));
  }
  const Index m = static_cast<Index>(c.size());
  if (m > kMaxHalfspaceDim) throw std::invalid_argument("halfspace: dimension too large");
  double sum = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
    double r = t;
    int bits = 0;
    for (Index a = 0; a < m; ++a)
      if (mask >> a & 1) {
        r -= c[a];
        ++bits;
      }
    if (r > 0) sum += (bits & 1 ? -1.0 : 1.0) * std::pow(r, static_cast<double>(m));
  }
  double denom = 1;
  for (Index a = 0; a < m; ++a) denom *= static_cast<double>(a + 1) * c[a];
  return std::clamp(sum / denom, 0.0, 1.0);
}

IntegrandSpec halfspace(const Vector<double>& anchor, const Vector<double>& normal) {
  IntegrandSpec s;
  s.kind = IntegrandKind::halfspace;
  s.dim = anchor.size();
  s.anchor = anchor;
  s.normal = normal;
  s.exact_integral = halfspace_volume(anchor, normal);
  return s;
}

IntegrandSpec make_halfspace(Index dim, Seed seed) {
  if (dim < 1) throw std::invalid_argument("make_halfspace: dim must be >= 1");
  Rng rng(seed, 0);
  Vector<double> p(dim), n(dim);
  for (Index a = 0; a < dim; ++a) p(a) = rng.uniform();
  do {
    for (Index a = 0; a < dim; ++a) n(a) = rng.normal();
  } while (n.norm() == 0);
  return halfspace(p, n / n.norm());
}

double estimate(const IntegrandSpec& spec, const PointSetd& points) {
  if (points.dim() != spec.dim) throw std::invalid_argument("estimate: dimension mismatch");
  if (points.size() == 0) throw std::invalid_argument("estimate: empty point set");
  double s = 0;
  for (Index k = 0; k < points.size(); ++k) s += spec(points.coords().col(k));
  return s / static_cast<double>(points.size());
}

PointSetd cached_gbn_set(Index n, Index dim, Seed seed, const SweepOptions& opt) {
  namespace fs = std::filesystem;
  std::string path;
  if (!opt.cache_dir.empty()) {
    char name[160];
    std::snprintf(name, sizeof name, "gbn_n%ld_d%ld_s%.6g_seed%llu_it%d.txt",
                  static_cast<long>(n), static_cast<long>(dim), opt.gbn_sigma_rel,
                  static_cast<unsigned long long>(seed.value), opt.gbn_iterations);
    path = (fs::path(opt.cache_dir) / name).string();
    if (fs::exists(path)) {
      auto p = read_points(path);
      if (p.size() == n && p.dim() == dim) return p;
    }
  }
  const auto kc = KernelConfigd::make(opt.gbn_sigma_rel, n, dim);
  OptimizeConfig oc;
  oc.iterations = opt.gbn_iterations;
  oc.seed = seed;
  auto p = optimize_uniform(random_init(n, dim, seed), kc, oc).first;
  if (!path.empty()) {
    fs::create_directories(opt.cache_dir);
    write_points(path, p, "gbn sigma_rel " + std::to_string(opt.gbn_sigma_rel));
  }
  return p;
}

VarianceReport variance_sweep(Sampler sampler, IntegrandKind family, Index dim,
                              const std::vector<Index>& ns, Index instances,
                              Index randomizations, Seed seed, const SweepOptions& opt) {
  if (dim < 1 || instances < 1 || randomizations < 1)
    throw std::invalid_argument("variance_sweep: dim, instances, randomizations must be >= 1");
  VarianceReport rep;
  rep.sampler = sampler;
  rep.family = family;
  rep.dim = dim;
  rep.randomization = sampler == Sampler::gbn ? "shift" : "fresh";

  std::vector<IntegrandSpec> specs;
  for (Index i = 0; i < instances; ++i) {
    const Seed s{derive(seed.value, static_cast<std::uint64_t>(family), static_cast<std::uint64_t>(i))};
    specs.push_back(family == IntegrandKind::gaussian_sum ? make_gaussian_sum(dim, s)
                                                          : make_halfspace(dim, s));
  }

  for (Index n : ns) {
    if (n < 1) throw std::invalid_argument("variance_sweep: N must be >= 1");
    std::optional<PointSetd> base;
    if (sampler == Sampler::gbn) base = cached_gbn_set(n, dim, seed, opt);
    const Index total = instances * randomizations;
    std::vector<double> err2(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < total; ++j) {
      const Index i = j / randomizations;
      const Seed s{derive(seed.value ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(n),
                          static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j))};
      const auto p = [&] {
        if (sampler == Sampler::random) return random_init(n, dim, s);
        if (sampler == Sampler::stratified) return stratified_init(n, dim, s);
        Rng rng(s, 0);
        Vector<double> off(dim);
        for (Index a = 0; a < dim; ++a) off(a) = rng.uniform();
        return toroidal_shift(*base, off);
      }();
      const double e = estimate(specs[i], p) - specs[i].exact_integral;
      err2[j] = e * e;
    }
    double sum = 0;
    for (double v : err2) sum += v;
    rep.rows.push_back({n, sum / static_cast<double>(total), instances, randomizations});
  }
  return rep;
}

void write_csv(std::ostream& out, const std::vector<VarianceReport>& reports) {
  out << "sampler,family,dim,N,variance,instances,randomizations\n";
  char buf[64];
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, "%.10g", row.variance);
      out << to_string(r.sampler) << ',' << to_string(r.family) << ',' << r.dim << ','
          << row.n << ',' << buf << ',' << row.instances << ',' << row.randomizations << '\n';
    }
}

}  // namespace gbn
