#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridgepath/cvsearch.hpp"
#include "ridgepath/datagen.hpp"
#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/format.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/matrix_io.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/parallel.hpp"
#include "ridgepath/pichol.hpp"
#include "ridgepath/ridge.hpp"
#include "ridgepath/theory.hpp"
#include "ridgepath/trivec.hpp"

namespace ridgepath::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return kExitUsage;
    case ErrorCategory::Numerical: return kExitNumerical;
    case ErrorCategory::Io: return kExitIo;
  }
  return kExitUsage;
}

// ---------------------------------------------------------------------------
// Option bundles
// ---------------------------------------------------------------------------

struct GenOptions {
  std::size_t n = 200;
  std::size_t d = 32;
  std::string spectrum = "uniform";
  double rate = 0.5;
  double scale = 1.0;
  double noise = 0.3;
  std::string labels = "continuous";
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct CvOptions {
  std::string x_path;
  std::string y_path;
  bool no_intercept = false;
  std::string method = "pichol";
  double lo = 1e-3;
  double hi = 1.0;
  std::size_t q = 31;
  std::size_t g = 4;
  std::size_t r = 2;
  std::string layout = "recursive";
  std::size_t h0 = kDefaultRecursionThreshold;
  bool raw_monomials = false;
  std::string metric = "auto";
  std::size_t folds = 5;
  std::size_t active_folds = 0;
  std::uint64_t seed = 1;
  std::optional<double> mchol_center;
  double mchol_s = 1.5;
  double mchol_smin = 0.0025;
  std::size_t rank = 0;
  std::size_t oversample = 10;
  std::size_t power = 2;
  std::string csv_path;
};

struct FactorPathOptions {
  std::string h_path;
  std::string x_path;
  bool no_intercept = false;
  std::vector<double> lambdas;
  bool lambdas_given = false;
  double lo = 1e-1;
  double hi = 1.0;
  std::size_t q = 31;
  std::size_t g = 4;
  std::size_t r = 2;
  std::string layout = "recursive";
  std::size_t h0 = kDefaultRecursionThreshold;
  std::string csv_path;
};

struct BoundOptions {
  std::size_t order = 6;
  double lambda_c = 1.0;
  double gamma = 0.5;
  double w = 0.25;
  std::size_t g = 4;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t sweep = 21;
  std::size_t grid = theory::kDefaultRemainderGrid;
  std::string csv_path;
};

struct BenchOptions {
  std::vector<std::size_t> sizes{256, 512, 1024};
  std::size_t reps = 3;
  std::size_t g = 4;
  std::size_t r = 2;
  std::size_t h0 = kDefaultRecursionThreshold;
  std::uint64_t seed = 1;
  std::string csv_path;
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Writes to the file at `path`, or to `fallback` when the path is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  fn(os);
  os.flush();
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline Vector as_vector(const DenseMatrix& m, const std::string& what) {
  if (m.cols() != 1 && m.rows() != 1) {
    throw DimensionMismatch(what + " must be a single row or column, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  return m.storage();
}

inline RidgeProblem load_problem(const std::string& x_path, const std::string& y_path,
                                 bool no_intercept) {
  DenseMatrix features = load_any(x_path);
  Vector y = as_vector(load_any(y_path), "y");
  DenseMatrix x = no_intercept ? std::move(features) : with_intercept(features);
  return assemble(std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  SynthSpec spec;
  spec.n = o.n;
  spec.d = o.d;
  spec.spectrum.kind = o.spectrum == "decay" ? SpectrumKind::Decay : SpectrumKind::Uniform;
  if (o.spectrum != "decay" && o.spectrum != "uniform") {
    throw InvalidArgument("spectrum must be 'uniform' or 'decay'");
  }
  spec.spectrum.rate = o.rate;
  spec.spectrum.scale = o.scale;
  spec.noise_sigma = o.noise;
  if (o.labels != "continuous" && o.labels != "binary") {
    throw InvalidArgument("labels must be 'continuous' or 'binary'");
  }
  spec.label_kind = o.labels == "binary" ? LabelKind::Binary : LabelKind::Continuous;
  spec.seed = o.seed;
  if (spec.n < spec.d + 1) {
    err << "warning: n=" << spec.n << " < d+1=" << spec.d + 1
        << "; the design is rank deficient\n";
  }
  const SynthData data = generate(spec);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create '" + o.out_dir + "': " + ec.message());
  const std::filesystem::path dir(o.out_dir);
  save_matrix((dir / "X.mat").string(), data.features);
  save_matrix((dir / "y.mat").string(), DenseMatrix::column(data.y));
  save_matrix((dir / "theta_true.mat").string(), DenseMatrix::column(data.theta_true));
  out << "wrote " << (dir / "X.mat").string() << " (" << spec.n << "x" << spec.d << "), y.mat, "
      << "theta_true.mat\n";
  return kExitOk;
}

inline CvReport run_cv(const RidgeProblem& p, const CvOptions& o) {
  const Method method = parse_method(o.method);
  const FoldPlan folds = make_folds(p.y, o.folds, o.seed, o.active_folds);
  const HoldoutMetric metric =
      o.metric == "auto" ? default_metric(p.y) : HoldoutMetric{parse_metric_kind(o.metric)};
  const LambdaGrid grid = LambdaGrid::make(o.lo, o.hi, o.q);
  switch (method) {
    case Method::Chol: return grid_search_exact(p, grid, folds, metric);
    case Method::PIChol: {
      PicholConfig cfg;
      cfg.samples = o.g;
      cfg.degree = o.r;
      cfg.layout = parse_layout_kind(o.layout);
      cfg.h0 = o.h0;
      cfg.fit.raw_monomials = o.raw_monomials;
      return grid_search_pichol(p, grid, folds, metric, cfg);
    }
    case Method::MChol: {
      MCholConfig cfg;
      cfg.center = o.mchol_center.value_or(0.5 * (std::log10(o.lo) + std::log10(o.hi)));
      cfg.spread = o.mchol_s;
      cfg.min_spread = o.mchol_smin;
      return mchol_search(p, cfg, folds, metric);
    }
    case Method::SVD:
    case Method::TSVD:
    case Method::RSVD: {
      SvdConfig cfg;
      cfg.backend = method == Method::SVD    ? Backend::SVD
                    : method == Method::TSVD ? Backend::TSVD
                                             : Backend::RSVD;
      cfg.rank = o.rank;
      if (method != Method::SVD && cfg.rank == 0) {
        throw InvalidRank("--rank is required for tsvd and rsvd");
      }
      cfg.oversample = o.oversample;
      cfg.power_iters = o.power;
      cfg.seed = o.seed;
      return grid_search_svd(p, grid, folds, metric, cfg);
    }
    case Method::PINRMSE: {
      FitOptions fo;
      fo.raw_monomials = o.raw_monomials;
      return pinrmse_search(p, grid, folds, metric, o.g, o.r, fo);
    }
  }
  throw InvalidArgument("unknown method");
}

inline int cmd_cv(const CvOptions& o, std::ostream& out, std::ostream&) {
  const RidgeProblem p = load_problem(o.x_path, o.y_path, o.no_intercept);
  const CvReport report = run_cv(p, o);
  if (!o.csv_path.empty()) {
    with_output(o.csv_path, out, [&](std::ostream& os) { write_cv_csv(os, report); });
  }
  out << "method=" << to_string(report.method) << " best_lambda="
      << format_double(report.best_lambda) << " best_error=" << format_double(report.best_error)
      << " wall_seconds=" << format_double(report.wall_seconds) << '\n';
  return kExitOk;
}

inline int cmd_factor_path(const FactorPathOptions& o, std::ostream& out, std::ostream&) {
  if (o.h_path.empty() == o.x_path.empty()) {
    throw InvalidArgument("give exactly one of --hessian or --x");
  }
  Vector lambdas;
  if (o.lambdas_given) {
    lambdas = o.lambdas;
    if (lambdas.empty()) throw InvalidArgument("--lambdas is empty");
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  } else {
    lambdas = LambdaGrid::make(o.lo, o.hi, o.q).values;
  }
  for (double l : lambdas) {
    if (!(l > 0.0)) throw InvalidArgument("lambdas must be > 0");
  }
  DenseMatrix h;
  if (!o.h_path.empty()) {
    h = load_any(o.h_path);
  } else {
    DenseMatrix x = load_any(o.x_path);
    h = gram(o.no_intercept ? x : with_intercept(x));
  }
  if (!h.is_square()) throw DimensionMismatch("Hessian must be square");
  const std::vector<std::size_t> idx = sample_indices(lambdas.size(), o.g);
  Vector samples;
  for (std::size_t i : idx) samples.push_back(lambdas[i]);
  const VecLayout layout = build_layout(parse_layout_kind(o.layout), h.rows(), o.h0);
  const InterpModel model = fit(h, samples, o.r, layout);
  const FitDiagnostics diag = diagnostics(model, h, lambdas);
  with_output(o.csv_path, out, [&](std::ostream& os) {
    os << "lambda,nrmse,sample\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const bool is_sample = std::find(idx.begin(), idx.end(), i) != idx.end();
      os << format_double(diag.nrmse_per_lambda[i].first) << ','
         << format_double(diag.nrmse_per_lambda[i].second) << ',' << (is_sample ? 1 : 0) << '\n';
    }
  });
  if (!o.csv_path.empty() && o.csv_path != "-") {
    out << "max_nrmse=" << format_double(diag.max_nrmse)
        << " fit_residual=" << format_double(diag.residual_fro) << '\n';
  }
  return kExitOk;
}

inline constexpr const char* kBoundCsvHeader =
    "trial,lambda,gamma,w,g,D,norm_v_dagger,R,lhs,rhs,satisfied,near_tight";

inline int cmd_diagnose_bound(const BoundOptions& o, std::ostream& out, std::ostream& err) {
  if (o.trials < 1) throw InvalidArgument("--trials must be >= 1");
  theory::BoundConfig cfg;
  cfg.lambda_c = o.lambda_c;
  cfg.gamma = o.gamma;
  cfg.w = o.w;
  cfg.samples = o.g;
  cfg.sweep = o.sweep;
  cfg.remainder_grid = o.grid;
  std::vector<std::vector<theory::BoundReport>> all(o.trials);
  for (std::size_t t = 0; t < o.trials; ++t) {
    const DenseMatrix a = theory::random_spd(o.order, o.seed + t);
    all[t] = theory::check_main_bound(a, cfg);
  }
  std::size_t violated = 0;
  std::size_t tight = 0;
  with_output(o.csv_path, out, [&](std::ostream& os) {
    os << kBoundCsvHeader << '\n';
    for (std::size_t t = 0; t < all.size(); ++t)
      for (const auto& r : all[t]) {
        violated += r.satisfied ? 0 : 1;
        tight += r.near_tight ? 1 : 0;
        os << t << ',' << format_double(r.lambda) << ',' << format_double(r.gamma) << ','
           << format_double(r.w) << ',' << format_double(r.g) << ',' << format_double(r.d) << ','
           << format_double(r.norm_v_dagger) << ',' << format_double(r.r_interval) << ','
           << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
           << (r.satisfied ? 1 : 0) << ',' << (r.near_tight ? 1 : 0) << '\n';
      }
  });
  err << "bound rows: violated=" << violated << " near_tight=" << tight << '\n';
  return kExitOk;
}

namespace detail {

inline double median(Vector v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Well-conditioned SPD test matrix: random symmetric part plus h on the diagonal.
inline DenseMatrix bench_spd(std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(h, h);
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = j; i < h; ++i) a(i, j) = a(j, i) = u(rng);
  a.add_diagonal(static_cast<double>(h));
  return a;
}

}  // namespace detail

inline constexpr const char* kBenchCsvHeader = "h,layout,phase,median_seconds,reps";

/// Per size: one exact factorization, then gather/fit/eval for every layout.
inline int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream&) {
  if (o.sizes.empty()) throw InvalidArgument("--sizes is empty");
  if (o.reps < 1) throw InvalidArgument("--reps must be >= 1");
  with_output(o.csv_path, out, [&](std::ostream& os) {
    os << kBenchCsvHeader << '\n';
    for (std::size_t h : o.sizes) {
      if (h < 1) throw InvalidArgument("sizes must be >= 1");
      const DenseMatrix a = detail::bench_spd(h, o.seed);
      const Vector lambdas = log_space(0.1, 1.0, o.g);
      std::vector<CholeskyFactor> factors;
      Vector t_fact;
      for (std::size_t rep = 0; rep < o.reps; ++rep) {
        Stopwatch sw;
        CholeskyFactor l = cholesky_shifted(a, lambdas[0]);
        t_fact.push_back(sw.seconds());
      }
      for (double l : lambdas) factors.push_back(cholesky_shifted(a, l));
      os << h << ",none,factorize," << format_double(detail::median(t_fact)) << ',' << o.reps
         << '\n';
      for (LayoutKind kind : {LayoutKind::RowWise, LayoutKind::FullMatrix, LayoutKind::Recursive}) {
        const VecLayout layout = build_layout(kind, h, o.h0);
        Vector t_vec, t_fit, t_interp;
        for (std::size_t rep = 0; rep < o.reps; ++rep) {
          Stopwatch sw;
          const TargetMatrix t = bulk_gather(factors, layout);
          t_vec.push_back(sw.seconds());
          sw.restart();
          const InterpModel model = fit_from_factors(factors, o.r, layout);
          t_fit.push_back(model.timings.fit);
          sw.restart();
          const CholeskyFactor e = eval(model, 0.5);
          t_interp.push_back(sw.seconds());
        }
        const std::string name(to_string(kind));
        os << h << ',' << name << ",vec," << format_double(detail::median(t_vec)) << ','
           << o.reps << '\n';
        os << h << ',' << name << ",fit," << format_double(detail::median(t_fit)) << ','
           << o.reps << '\n';
        os << h << ',' << name << ",interp," << format_double(detail::median(t_interp)) << ','
           << o.reps << '\n';
      }
    }
  });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"ridgepath: ridge regression regularization paths with interpolated Cholesky factors"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: RIDGEPATH_THREADS or 1)");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic regression problem");
  g->add_option("--n", gen.n, "samples")->capture_default_str();
  g->add_option("--d", gen.d, "features (intercept excluded)")->capture_default_str();
  g->add_option("--spectrum", gen.spectrum, "uniform | decay")->capture_default_str();
  g->add_option("--rate", gen.rate, "decay exponent")->capture_default_str();
  g->add_option("--scale", gen.scale, "largest feature singular value")->capture_default_str();
  g->add_option("--noise", gen.noise, "noise standard deviation")->capture_default_str();
  g->add_option("--labels", gen.labels, "continuous | binary")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out_dir, "output directory")->capture_default_str();

  CvOptions cv;
  auto* c = app.add_subcommand("cv", "cross-validated lambda search");
  c->add_option("--x", cv.x_path, "feature matrix (.mat or .csv)")->required();
  c->add_option("--y", cv.y_path, "targets (.mat or .csv)")->required();
  c->add_flag("--no-intercept", cv.no_intercept, "do not append a ones column");
  c->add_option("--method", cv.method, "chol | pichol | mchol | svd | tsvd | rsvd | pinrmse")
      ->capture_default_str();
  c->add_option("--lo", cv.lo)->capture_default_str();
  c->add_option("--hi", cv.hi)->capture_default_str();
  c->add_option("--q", cv.q, "grid points")->capture_default_str();
  c->add_option("--g", cv.g, "sampled lambdas")->capture_default_str();
  c->add_option("--r", cv.r, "polynomial degree")->capture_default_str();
  c->add_option("--layout", cv.layout, "rowwise | full | recursive")->capture_default_str();
  c->add_option("--h0", cv.h0, "recursion threshold")->capture_default_str();
  c->add_flag("--raw-monomials", cv.raw_monomials, "never rescale lambda before fitting");
  c->add_option("--metric", cv.metric, "auto | rmse | misclassification")->capture_default_str();
  c->add_option("--folds", cv.folds, "k")->capture_default_str();
  c->add_option("--active-folds", cv.active_folds, "evaluate only the first N folds (0 = all)")
      ->capture_default_str();
  c->add_option("--seed", cv.seed)->capture_default_str();
  c->add_option("--mchol-center", cv.mchol_center, "log10 of the starting lambda");
  c->add_option("--mchol-s", cv.mchol_s)->capture_default_str();
  c->add_option("--mchol-smin", cv.mchol_smin)->capture_default_str();
  c->add_option("--rank", cv.rank, "rank for tsvd/rsvd");
  c->add_option("--oversample", cv.oversample)->capture_default_str();
  c->add_option("--power", cv.power, "power iterations for rsvd")->capture_default_str();
  c->add_option("--csv", cv.csv_path, "per-lambda report CSV ('-' for stdout)");

  FactorPathOptions fp;
  auto* f = app.add_subcommand("factor-path", "NRMSE of interpolated factors along a lambda path");
  f->add_option("--hessian", fp.h_path, "Hessian matrix file");
  f->add_option("--x", fp.x_path, "feature matrix; the Hessian is formed from it");
  f->add_flag("--no-intercept", fp.no_intercept);
  auto* lam = f->add_option("--lambdas", fp.lambdas, "explicit lambdas")->delimiter(',');
  f->add_option("--lo", fp.lo)->capture_default_str();
  f->add_option("--hi", fp.hi)->capture_default_str();
  f->add_option("--q", fp.q)->capture_default_str();
  f->add_option("--g", fp.g)->capture_default_str();
  f->add_option("--r", fp.r)->capture_default_str();
  f->add_option("--layout", fp.layout)->capture_default_str();
  f->add_option("--h0", fp.h0)->capture_default_str();
  f->add_option("--csv", fp.csv_path, "output CSV (default stdout)");

  BoundOptions bo;
  auto* b = app.add_subcommand("diagnose-bound", "check the uniform interpolation error bound");
  b->add_option("--order", bo.order)->capture_default_str();
  b->add_option("--lambda-c", bo.lambda_c)->capture_default_str();
  b->add_option("--gamma", bo.gamma)->capture_default_str();
  b->add_option("--w", bo.w)->capture_default_str();
  b->add_option("--g", bo.g)->capture_default_str();
  b->add_option("--trials", bo.trials)->capture_default_str();
  b->add_option("--seed", bo.seed)->capture_default_str();
  b->add_option("--sweep", bo.sweep)->capture_default_str();
  b->add_option("--grid", bo.grid, "remainder grid points")->capture_default_str();
  b->add_option("--csv", bo.csv_path, "output CSV (default stdout)");

  BenchOptions be;
  auto* bn = app.add_subcommand("bench", "phase timings per size and layout");
  bn->add_option("--sizes", be.sizes)->delimiter(',')->capture_default_str();
  bn->add_option("--reps", be.reps)->capture_default_str();
  bn->add_option("--g", be.g)->capture_default_str();
  bn->add_option("--r", be.r)->capture_default_str();
  bn->add_option("--h0", be.h0)->capture_default_str();
  bn->add_option("--seed", be.seed)->capture_default_str();
  bn->add_option("--csv", be.csv_path, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (g->parsed()) return cmd_gen(gen, out, err);
    if (c->parsed()) return cmd_cv(cv, out, err);
    if (f->parsed()) {
      fp.lambdas_given = lam->count() > 0;
      return cmd_factor_path(fp, out, err);
    }
    if (b->parsed()) return cmd_diagnose_bound(bo, out, err);
    if (bn->parsed()) return cmd_bench(be, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace ridgepath::cli
