// gbn: optimize, analyze and benchmark Gaussian blue noise point sets.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gbn/adaptive.hpp"
#include "gbn/bench.hpp"
#include "gbn/bounded.hpp"
#include "gbn/io.hpp"
#include "gbn/spectral.hpp"
#include "gbn/stepbn.hpp"
#include "gbn/uniform.hpp"
#include "gbn/zoneplate.hpp"

using namespace gbn;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void write_trace(const std::string& path, const OptimizeTrace& t) {
  if (path.empty()) return;
  auto out = open_text(path);
  out << "iteration,energy,max_displacement,step_scale\n";
  for (const auto& r : t.records)
    out << r.iteration << ',' << fmt(r.energy) << ',' << fmt(r.max_displacement) << ','
        << fmt(r.step_scale) << '\n';
}

std::vector<PointSetd> read_all(const std::vector<std::string>& paths) {
  std::vector<PointSetd> sets;
  for (const auto& p : paths) {
    sets.push_back(read_points(p));
    if (sets.back().dim() != sets.front().dim())
      throw std::invalid_argument("point files differ in dimension: " + p);
  }
  return sets;
}

Periodogram mean_periodogram(const std::vector<PointSetd>& sets, Index fmax) {
  if (fmax <= 0) fmax = default_fmax(sets.front().size(), sets.front().dim());
  std::vector<Periodogram> ps;
  for (const auto& s : sets) ps.push_back(periodogram(s, fmax));
  return average(ps);
}

// Reconstruction as an image: dark = dense, like the stippling input.
void write_reconstruction(const std::string& path, const PointSetd& points, Index w, Index h,
                          double sigma_rel, std::optional<double> mean) {
  const auto kc = KernelConfigd::make(sigma_rel, points.size(), 2);
  const auto shapes = shape_factors(points, kc.sigma_abs, 10);
  const auto img = reconstruct(points, shapes, kc, w, h, mean);
  write_pgm(path, 1.0 - img.min(1.0), 16);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian blue noise point sets"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = OpenMP default)")
      ->envname("GBN_THREADS")
      ->check(CLI::NonNegativeNumber);

  std::function<void()> run;

  // optimize
  struct {
    Index n = 0, dim = 2, iters = 10000;
    double sigma = 1.0, balance = 1.0;
    std::uint64_t seed = 0;
    std::string domain = "torus", init = "random", out, trace;
  } o;
  auto* opt = app.add_subcommand("optimize", "Uniform GBN on the torus or the unit box");
  opt->add_option("--n", o.n, "Number of points")->required()->check(CLI::PositiveNumber);
  opt->add_option("--dim", o.dim, "Dimension")->check(CLI::PositiveNumber);
  opt->add_option("--sigma", o.sigma, "Kernel width in units of n^{-1/d}")->check(CLI::PositiveNumber);
  opt->add_option("--iters", o.iters, "Iterations")->check(CLI::NonNegativeNumber);
  opt->add_option("--seed", o.seed, "Seed");
  opt->add_option("--domain", o.domain, "torus or box")->check(CLI::IsMember({"torus", "box"}));
  opt->add_option("--init", o.init, "random or stratified")
      ->check(CLI::IsMember({"random", "stratified"}));
  opt->add_option("--balance", o.balance, "Box domain term multiplier")->check(CLI::PositiveNumber);
  opt->add_option("--out", o.out, "Point file")->required();
  opt->add_option("--trace", o.trace, "Trace CSV");
  opt->callback([&] {
    run = [&] {
      const Seed seed{o.seed};
      auto start = o.init == "random" ? random_init(o.n, o.dim, seed) : stratified_init(o.n, o.dim, seed);
      const auto kc = KernelConfigd::make(o.sigma, o.n, o.dim);
      OptimizeConfig oc;
      oc.iterations = o.iters;
      oc.seed = seed;
      if (o.domain == "torus") {
        auto [p, t] = optimize_uniform(start, kc, oc);
        write_points(o.out, p, "gbn torus sigma " + fmt(o.sigma));
        write_trace(o.trace, t);
      } else {
        auto [p, t] = optimize_bounded(PointSetd(start.coords(), Domain::bounded), kc, oc, o.balance);
        write_points(o.out, p, "gbn box sigma " + fmt(o.sigma));
        write_trace(o.trace, t);
      }
    };
  });

  // stipple
  struct {
    std::string image, out, recon;
    Index n = 0, iters = 2000, width = 0, height = 0;
    double sigma = 1.0;
    std::uint64_t seed = 0;
  } s;
  auto* sti = app.add_subcommand("stipple", "Density-adaptive GBN from a grayscale PGM (dark = dense)");
  sti->add_option("--image", s.image, "Input PGM")->required();
  sti->add_option("--n", s.n, "Number of points")->required()->check(CLI::Range(Index(2), Index(1) << 30));
  sti->add_option("--sigma", s.sigma, "Kernel width in units of n^{-1/2}")->check(CLI::PositiveNumber);
  sti->add_option("--iters", s.iters, "Iterations")->check(CLI::NonNegativeNumber);
  sti->add_option("--seed", s.seed, "Seed");
  sti->add_option("--out", s.out, "Point file")->required();
  sti->add_option("--recon", s.recon, "Also write the reconstruction PGM");
  sti->add_option("--width", s.width, "Reconstruction width (default: input)");
  sti->add_option("--height", s.height, "Reconstruction height (default: input)");
  sti->callback([&] {
    run = [&] {
      const auto density = density_from_gray(read_pgm(s.image));
      const auto kc = KernelConfigd::make(s.sigma, s.n, 2);
      OptimizeConfig oc;
      oc.iterations = s.iters;
      oc.seed = Seed{s.seed};
      const auto [p, shapes, t] = optimize_adaptive(density, s.n, kc, oc);
      write_points(s.out, p, "gbn stipple sigma " + fmt(s.sigma));
      if (!s.recon.empty())
        write_reconstruction(s.recon, p, s.width > 0 ? s.width : density.width(),
                             s.height > 0 ? s.height : density.height(), s.sigma, density.mean());
    };
  });

  // reconstruct
  struct {
    std::string points, image, out;
    Index width = 256, height = 256;
    double sigma = 1.0;
  } r;
  auto* rec = app.add_subcommand("reconstruct", "Render sum_k a_k exp(-a_k |x - x_k|^2 / 2 sigma^2)");
  rec->add_option("--points", r.points, "2D point file")->required();
  rec->add_option("--width", r.width, "Width")->check(CLI::PositiveNumber);
  rec->add_option("--height", r.height, "Height")->check(CLI::PositiveNumber);
  rec->add_option("--sigma", r.sigma, "Kernel width in units of n^{-1/2}")->check(CLI::PositiveNumber);
  rec->add_option("--image", r.image, "Source PGM; its density mean sets the output level");
  rec->add_option("--out", r.out, "Output PGM (16-bit)")->required();
  rec->callback([&] {
    run = [&] {
      const auto p = read_points(r.points);
      if (p.dim() != 2) throw std::invalid_argument("reconstruct: 2D points required");
      std::optional<double> mean;
      if (!r.image.empty()) mean = density_from_gray(read_pgm(r.image)).mean();
      if (p.size() < 2) {
        // a lone point has no neighbours to fit a shape against
        const auto kc = KernelConfigd::make(r.sigma, 1, 2);
        write_pgm(r.out, 1.0 - reconstruct(p, {Eigen::VectorXd::Ones(1)}, kc, r.width, r.height, mean).min(1.0), 16);
      } else {
        write_reconstruction(r.out, p, r.width, r.height, r.sigma, mean);
      }
    };
  });

  // spectrum / radial
  struct {
    std::vector<std::string> points;
    Index fmax = 0;
    double log_min = -4, log_max = 1;
    std::string out;
  } sp;
  auto* spe = app.add_subcommand("spectrum", "Log-mapped 2D periodogram image");
  spe->add_option("--points", sp.points, "Point files (averaged)")->required();
  spe->add_option("--fmax", sp.fmax, "Highest frequency per axis (default 2 n^{1/d})");
  spe->add_option("--log-min", sp.log_min, "log10 power mapped to black");
  spe->add_option("--log-max", sp.log_max, "log10 power mapped to white");
  spe->add_option("--out", sp.out, "Output PGM")->required();
  spe->callback([&] {
    run = [&] {
      const auto sets = read_all(sp.points);
      if (sets.front().dim() != 2) throw std::invalid_argument("spectrum: 2D points required");
      if (!(sp.log_max > sp.log_min)) throw std::invalid_argument("spectrum: empty log range");
      const auto pg = mean_periodogram(sets, sp.fmax);
      const Index side = pg.side();
      Eigen::ArrayXXd img(side, side);
      for (Index i = 0; i < pg.size(); ++i) {
        const double v = std::log10(std::max(pg.power(i), 1e-300));
        img(i / side, i % side) = (v - sp.log_min) / (sp.log_max - sp.log_min);
      }
      write_pgm(sp.out, img, 8);
    };
  });
  struct {
    std::vector<std::string> points;
    Index fmax = 0;
    std::string out;
  } ra;
  auto* rad = app.add_subcommand("radial", "Exact radial power CSV r2,r,power,count");
  rad->add_option("--points", ra.points, "Point files (averaged)")->required();
  rad->add_option("--fmax", ra.fmax, "Highest frequency per axis (default 2 n^{1/d})");
  rad->add_option("--out", ra.out, "Output CSV")->required();
  rad->callback([&] {
    run = [&] {
      const auto rp = radial_profile(mean_periodogram(read_all(ra.points), ra.fmax));
      auto out = open_text(ra.out);
      out << "r2,r,power,count\n";
      for (const auto& e : rp.entries)
        out << e.r2 << ',' << fmt(e.r) << ',' << fmt(e.mean_power) << ',' << e.count << '\n';
    };
  });

  // bench
  struct {
    std::vector<std::string> samplers{"gbn", "random", "stratified"};
    std::string family = "gaussian_sum", cache, out;
    Index dim = 2, instances = 20, randomizations = 100;
    std::vector<Index> ns{1, 4, 16, 64, 256, 1024, 4096};
    std::uint64_t seed = 0;
    SweepOptions sw;
  } b;
  auto* ben = app.add_subcommand("bench", "Monte Carlo integration variance sweep");
  ben->add_option("--sampler", b.samplers, "gbn, random, stratified")
      ->delimiter(',')
      ->check(CLI::IsMember({"gbn", "random", "stratified"}));
  ben->add_option("--family", b.family, "gaussian_sum or halfspace")
      ->check(CLI::IsMember({"gaussian_sum", "halfspace"}));
  ben->add_option("--dim", b.dim, "Dimension")->check(CLI::PositiveNumber);
  ben->add_option("--ns", b.ns, "Point counts")->delimiter(',')->check(CLI::PositiveNumber);
  ben->add_option("--instances", b.instances, "Integrand instances")->check(CLI::PositiveNumber);
  ben->add_option("--randomizations", b.randomizations, "Randomizations per instance")
      ->check(CLI::PositiveNumber);
  ben->add_option("--seed", b.seed, "Seed");
  ben->add_option("--cache", b.sw.cache_dir, "Directory for optimized GBN sets");
  ben->add_option("--gbn-sigma", b.sw.gbn_sigma_rel, "GBN kernel width")->check(CLI::PositiveNumber);
  ben->add_option("--gbn-iters", b.sw.gbn_iterations, "GBN iterations")->check(CLI::NonNegativeNumber);
  ben->add_option("--out", b.out, "Output CSV (- for stdout)")->required();
  ben->callback([&] {
    run = [&] {
      std::vector<VarianceReport> reps;
      for (const auto& name : b.samplers) {
        reps.push_back(variance_sweep(parse_sampler(name), parse_integrand(b.family), b.dim, b.ns,
                                      b.instances, b.randomizations, Seed{b.seed}, b.sw));
        std::cerr << name << ": randomization " << reps.back().randomization << '\n';
      }
      if (b.out == "-") {
        write_csv(std::cout, reps);
      } else {
        auto out = open_text(b.out);
        write_csv(out, reps);
      }
    };
  });

  // stepbn
  struct {
    Index n = 0, dim = 2, iters = 10000;
    int cut = 0;
    double sigma = 0.5;
    std::optional<double> step;
    std::uint64_t seed = 0;
    std::string out, trace;
  } st;
  auto* ste = app.add_subcommand("stepbn", "Step blue noise: suppress the frequency cube |f_a| <= cut");
  ste->add_option("--n", st.n, "Number of points")->required()->check(CLI::PositiveNumber);
  ste->add_option("--dim", st.dim, "Dimension")->check(CLI::PositiveNumber);
  ste->add_option("--cut", st.cut, "Highest suppressed frequency")->required()->check(CLI::PositiveNumber);
  ste->add_option("--iters", st.iters, "Iterations")->check(CLI::NonNegativeNumber);
  ste->add_option("--sigma", st.sigma, "Kernel width in units of n^{-1/d}")->check(CLI::PositiveNumber);
  ste->add_option("--step", st.step, "Step scale (default 1, 0.25 in 1D)")->check(CLI::PositiveNumber);
  ste->add_option("--seed", st.seed, "Seed");
  ste->add_option("--out", st.out, "Point file")->required();
  ste->add_option("--trace", st.trace, "Trace CSV");
  ste->callback([&] {
    run = [&] {
      auto oc = step_default_config(st.dim);
      oc.iterations = st.iters;
      oc.seed = Seed{st.seed};
      if (st.step) oc.step_scale = *st.step;
      StepOptions so;
      so.sigma_rel = st.sigma;
      auto [p, t] = optimize_step(random_init(st.n, st.dim, Seed{st.seed}), st.cut, oc, so);
      write_points(st.out, p, "step blue noise cut " + std::to_string(st.cut));
      write_trace(st.trace, t);
    };
  });

  // zoneplate
  struct {
    std::string points, out;
    Index res = 512;
    std::optional<double> chirp;
    double splat = 0.5;
  } z;
  auto* zon = app.add_subcommand("zoneplate", "Sample sin(k |x|^2) at the points and splat");
  zon->add_option("--points", z.points, "2D point file")->required();
  zon->add_option("--res", z.res, "Image size")->check(CLI::PositiveNumber);
  zon->add_option("--chirp", z.chirp, "k (default 2 pi sqrt(n))")->check(CLI::PositiveNumber);
  zon->add_option("--splat", z.splat, "Splat width in units of n^{-1/2}")->check(CLI::PositiveNumber);
  zon->add_option("--out", z.out, "Output PGM")->required();
  zon->callback([&] {
    run = [&] {
      const auto p = read_points(z.points);
      if (p.dim() != 2) throw std::invalid_argument("zoneplate: 2D points required");
      const double h = 1 / std::sqrt(static_cast<double>(p.size()));
      write_pgm(z.out, render_zoneplate(p, z.res, z.chirp.value_or(default_chirp(p.size())), z.splat * h), 8);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);
  try {
    run();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
