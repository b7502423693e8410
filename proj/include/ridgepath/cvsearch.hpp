#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/format.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/parallel.hpp"
#include "ridgepath/pichol.hpp"
#include "ridgepath/ridge.hpp"
#include "ridgepath/trivec.hpp"

namespace ridgepath {

// ---------------------------------------------------------------------------
// Grid, folds, metric
// ---------------------------------------------------------------------------

struct LambdaGrid {
  double lo = 0.0;
  double hi = 0.0;
  Vector values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }

  static LambdaGrid make(double lo, double hi, std::size_t q) {
    if (!(lo > 0.0) || !std::isfinite(hi)) throw InvalidArgument("grid needs 0 < lo");
    if (q < 1) throw InvalidArgument("grid needs at least one point");
    if (q > 1 && !(hi > lo)) throw InvalidArgument("grid needs lo < hi");
    if (q == 1) hi = lo;
    return {lo, hi, log_space(lo, hi, q)};
  }
};

/// Fold index for every sample. `active` folds are evaluated (the first
/// `active` of `k`); it defaults to k.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;
  std::size_t active = 0;

  std::size_t fold_size(std::size_t f) const {
    return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), f));
  }
};

inline bool is_pm_one(std::span<const double> y) {
  if (y.empty()) return false;
  return std::all_of(y.begin(), y.end(), [](double v) { return v == 1.0 || v == -1.0; });
}

/// Seeded shuffle then round-robin assignment; stratified by label for +-1
/// targets so each fold sees both classes in proportion.
inline FoldPlan make_folds(std::span<const double> y, std::size_t k, std::uint64_t seed,
                           std::size_t active = 0) {
  if (k < 2) throw InvalidArgument("need k >= 2 folds");
  if (y.size() < k) {
    throw InvalidArgument("cannot split " + std::to_string(y.size()) + " samples into " +
                          std::to_string(k) + " nonempty folds");
  }
  if (active > k) throw InvalidArgument("active folds exceed k");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.active = active == 0 ? k : active;
  plan.assignments.assign(y.size(), 0);
  std::mt19937_64 rng(seed);

  std::vector<std::vector<std::size_t>> groups;
  if (is_pm_one(y)) {
    groups.resize(2);
    for (std::size_t i = 0; i < y.size(); ++i) groups[y[i] > 0 ? 1 : 0].push_back(i);
  } else {
    groups.emplace_back(y.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  std::size_t slot = 0;
  for (auto& grp : groups) {
    std::shuffle(grp.begin(), grp.end(), rng);
    for (std::size_t idx : grp) plan.assignments[idx] = slot++ % k;
  }
  return plan;
}

enum class MetricKind { RMSE, Misclassification };

struct HoldoutMetric {
  MetricKind kind = MetricKind::RMSE;
};

inline std::string_view to_string(MetricKind m) {
  return m == MetricKind::RMSE ? "rmse" : "misclassification";
}

inline MetricKind parse_metric_kind(std::string_view s) {
  if (s == "rmse") return MetricKind::RMSE;
  if (s == "misclassification" || s == "miscls" || s == "error-rate") {
    return MetricKind::Misclassification;
  }
  throw InvalidArgument("unknown metric '" + std::string(s) + "'");
}

/// Misclassification for +-1 labels, RMSE otherwise.
inline HoldoutMetric default_metric(std::span<const double> y) {
  return {is_pm_one(y) ? MetricKind::Misclassification : MetricKind::RMSE};
}

/// RMSE: sqrt(mean((X theta - y)^2)). Misclassification: share of samples
/// where sign(X theta) != sign(y), with sign(0) = +1.
inline double holdout_error(std::span<const double> theta, const DenseMatrix& x_val,
                            std::span<const double> y_val, HoldoutMetric metric) {
  if (x_val.rows() == 0 || y_val.empty()) throw EmptyValidationSet("validation set is empty");
  if (x_val.rows() != y_val.size() || x_val.cols() != theta.size()) {
    throw DimensionMismatch("validation data does not match theta");
  }
  const Vector pred = matvec(x_val, theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (metric.kind == MetricKind::RMSE) {
      const double e = pred[i] - y_val[i];
      acc += e * e;
    } else {
      const bool a = pred[i] >= 0.0;
      const bool b = y_val[i] >= 0.0;
      acc += a != b ? 1.0 : 0.0;
    }
  }
  acc /= static_cast<double>(pred.size());
  return metric.kind == MetricKind::RMSE ? std::sqrt(acc) : acc;
}

struct FoldSplit {
  RidgeProblem train;
  DenseMatrix x_val;
  Vector y_val;
};

inline FoldSplit split_fold(const DenseMatrix& x, std::span<const double> y, const FoldPlan& plan,
                            std::size_t fold) {
  if (plan.assignments.size() != x.rows() || y.size() != x.rows()) {
    throw DimensionMismatch("fold plan does not match the data");
  }
  const std::size_t nval = plan.fold_size(fold);
  const std::size_t ntr = x.rows() - nval;
  if (nval == 0) throw EmptyValidationSet("fold " + std::to_string(fold) + " is empty");
  if (ntr == 0) throw InvalidArgument("fold leaves no training samples");
  const std::size_t h = x.cols();
  DenseMatrix xt(ntr, h);
  DenseMatrix xv(nval, h);
  Vector yt(ntr);
  Vector yv(nval);
  std::size_t it = 0;
  std::size_t iv = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const bool val = plan.assignments[i] == fold;
    for (std::size_t j = 0; j < h; ++j) (val ? xv(iv, j) : xt(it, j)) = x(i, j);
    (val ? yv[iv++] : yt[it++]) = y[i];
  }
  return {assemble(std::move(xt), std::move(yt)), std::move(xv), std::move(yv)};
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Method { Chol, PIChol, MChol, SVD, TSVD, RSVD, PINRMSE };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Chol: return "chol";
    case Method::PIChol: return "pichol";
    case Method::MChol: return "mchol";
    case Method::SVD: return "svd";
    case Method::TSVD: return "tsvd";
    case Method::RSVD: return "rsvd";
    case Method::PINRMSE: return "pinrmse";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::Chol, Method::PIChol, Method::MChol, Method::SVD, Method::TSVD,
                   Method::RSVD, Method::PINRMSE}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

/// Wall-clock seconds per phase.
struct PhaseTimings {
  double assemble = 0.0;
  double factorize = 0.0;
  double vec = 0.0;
  double fit = 0.0;
  double interp = 0.0;
  double solve = 0.0;
  double predict = 0.0;

  PhaseTimings& operator+=(const PhaseTimings& o) {
    assemble += o.assemble;
    factorize += o.factorize;
    vec += o.vec;
    fit += o.fit;
    interp += o.interp;
    solve += o.solve;
    predict += o.predict;
    return *this;
  }
  PhaseTimings scaled(double s) const {
    return {assemble * s, factorize * s, vec * s, fit * s, interp * s, solve * s, predict * s};
  }
  double total() const { return assemble + factorize + vec + fit + interp + solve + predict; }
};

/// One evaluated (fold, lambda) pair. Fold-level setup work is spread evenly
/// over the fold's rows so that column sums equal phase totals.
struct CvRow {
  std::size_t fold = 0;
  double lambda = 0.0;
  double error = 0.0;
  PhaseTimings timings;
};

struct CvReport {
  Method method = Method::Chol;
  MetricKind metric = MetricKind::RMSE;
  std::vector<CvRow> rows;
  /// (lambda, mean error over active folds), increasing in lambda.
  std::vector<std::pair<double, double>> per_lambda_error;
  double best_lambda = 0.0;
  double best_error = 0.0;
  PhaseTimings timings;
  std::size_t folds = 0;
  /// Exact factorizations (or decompositions) performed, over all folds.
  std::size_t factorizations = 0;
  /// MChol refinement rounds; zero for other methods.
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
};

namespace detail {

// Averages rows per lambda, picks the argmin (ties: smallest lambda) and sums timings.
inline void finalize_report(CvReport& r) {
  std::map<double, std::pair<double, std::size_t>> acc;
  r.timings = {};
  for (const auto& row : r.rows) {
    auto& [sum, cnt] = acc[row.lambda];
    sum += row.error;
    ++cnt;
    r.timings += row.timings;
  }
  r.per_lambda_error.clear();
  for (const auto& [l, sc] : acc) {
    r.per_lambda_error.emplace_back(l, sc.first / static_cast<double>(sc.second));
  }
  if (r.per_lambda_error.empty()) throw InvalidArgument("no lambda was evaluated");
  r.best_lambda = r.per_lambda_error.front().first;
  r.best_error = r.per_lambda_error.front().second;
  for (const auto& [l, e] : r.per_lambda_error) {
    if (e < r.best_error) {
      r.best_error = e;
      r.best_lambda = l;
    }
  }
}

inline void check_folds(const FoldPlan& folds, std::size_t n) {
  if (folds.assignments.size() != n) throw DimensionMismatch("fold plan size != sample count");
  if (folds.active < 1 || folds.active > folds.k) throw InvalidArgument("bad active fold count");
}

inline void spread(std::span<CvRow> rows, const PhaseTimings& shared) {
  if (rows.empty()) return;
  const PhaseTimings part = shared.scaled(1.0 / static_cast<double>(rows.size()));
  for (auto& row : rows) row.timings += part;
}

}  // namespace detail

/// Grid indices round(i (q-1) / (g-1)): both endpoints plus evenly spread
/// interior points, so evaluation never extrapolates.
inline std::vector<std::size_t> sample_indices(std::size_t q, std::size_t g) {
  if (g < 2) throw InsufficientSamples("need at least two samples");
  if (g > q) throw InsufficientSamples("more samples than grid points");
  std::vector<std::size_t> idx(g);
  for (std::size_t i = 0; i < g; ++i) {
    idx[i] = static_cast<std::size_t>(std::llround(static_cast<double>(i * (q - 1)) /
                                                   static_cast<double>(g - 1)));
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

/// Exact Cholesky factorization and solve at every grid point and fold.
inline CvReport grid_search_exact(const RidgeProblem& p, const LambdaGrid& grid,
                                  const FoldPlan& folds, HoldoutMetric metric) {
  detail::check_folds(folds, p.samples());
  Stopwatch wall;
  CvReport report;
  report.method = Method::Chol;
  report.metric = metric.kind;
  report.folds = folds.active;
  const std::size_t q = grid.size();
  for (std::size_t f = 0; f < folds.active; ++f) {
    Stopwatch sw;
    const FoldSplit split = split_fold(p.x, p.y, folds, f);
    PhaseTimings shared;
    shared.assemble = sw.seconds();
    std::vector<CvRow> rows(q);
    parallel_for(q, [&](std::size_t i) {
      CvRow& row = rows[i];
      row.fold = f;
      row.lambda = grid[i];
      Stopwatch t;
      const CholeskyFactor l = cholesky_shifted(split.train.h, grid[i]);
      row.timings.factorize = t.seconds();
      t.restart();
      const Vector theta = solve_chol(l, split.train.g);
      row.timings.solve = t.seconds();
      t.restart();
      row.error = holdout_error(theta, split.x_val, split.y_val, metric);
      row.timings.predict = t.seconds();
    });
    detail::spread(rows, shared);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.factorizations += q;
  }
  detail::finalize_report(report);
  report.wall_seconds = wall.seconds();
  return report;
}

struct PicholConfig {
  std::size_t samples = 4;
  std::size_t degree = 2;
  LayoutKind layout = LayoutKind::Recursive;
  std::size_t h0 = kDefaultRecursionThreshold;
  FitOptions fit{};
};

/// Per fold: exact factors at `samples` grid points, one polynomial fit,
/// then interpolated factors and solves at every grid point.
inline CvReport grid_search_pichol(const RidgeProblem& p, const LambdaGrid& grid,
                                   const FoldPlan& folds, HoldoutMetric metric,
                                   const PicholConfig& cfg = {}) {
  detail::check_folds(folds, p.samples());
  if (cfg.samples <= cfg.degree) throw InsufficientSamples("need samples > degree");
  const std::vector<std::size_t> idx = sample_indices(grid.size(), cfg.samples);
  Vector sample_lambdas;
  for (std::size_t i : idx) sample_lambdas.push_back(grid[i]);
  const VecLayout layout = build_layout(cfg.layout, p.order(), cfg.h0);

  Stopwatch wall;
  CvReport report;
  report.method = Method::PIChol;
  report.metric = metric.kind;
  report.folds = folds.active;
  const std::size_t q = grid.size();
  for (std::size_t f = 0; f < folds.active; ++f) {
    Stopwatch sw;
    const FoldSplit split = split_fold(p.x, p.y, folds, f);
    PhaseTimings shared;
    shared.assemble = sw.seconds();
    const InterpModel model = fit(split.train.h, sample_lambdas, cfg.degree, layout, cfg.fit);
    shared.factorize = model.timings.factorize;
    shared.vec = model.timings.vec;
    shared.fit = model.timings.fit;

    std::vector<CvRow> rows(q);
    parallel_for(q, [&](std::size_t i) {
      CvRow& row = rows[i];
      row.fold = f;
      row.lambda = grid[i];
      Stopwatch t;
      const CholeskyFactor l = eval(model, grid[i]);
      row.timings.interp = t.seconds();
      t.restart();
      const Solution s = solve_with_factor(split.train, l, grid[i], Backend::PIChol);
      row.timings.solve = t.seconds();
      t.restart();
      row.error = holdout_error(s.theta, split.x_val, split.y_val, metric);
      row.timings.predict = t.seconds();
    });
    detail::spread(rows, shared);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.factorizations += cfg.samples;
  }
  detail::finalize_report(report);
  report.wall_seconds = wall.seconds();
  return report;
}

struct MCholConfig {
  double center = -1.5;  // log10 of the starting lambda
  double spread = 1.5;
  double min_spread = 0.0025;
};

struct MCholTrace {
  double center = 0.0;
  double center_error = 0.0;
  std::size_t iterations = 0;
  /// Distinct exponents evaluated.
  std::size_t evaluations = 0;
};

/// The narrowing loop over log10(lambda). `error_at` maps an exponent to an
/// error; each exponent is evaluated at most once.
template <class F>
MCholTrace mchol_minimize(F&& error_at, const MCholConfig& cfg) {
  if (!(cfg.spread > cfg.min_spread) || !(cfg.min_spread > 0.0)) {
    throw InvalidArgument("need spread > min_spread > 0");
  }
  if (!std::isfinite(cfg.center)) throw InvalidArgument("center must be finite");
  std::map<double, double> cache;
  auto eval_once = [&](double expo) {
    if (auto it = cache.find(expo); it != cache.end()) return it->second;
    const double e = error_at(expo);
    cache.emplace(expo, e);
    return e;
  };
  MCholTrace t;
  double c = cfg.center;
  double s = cfg.spread;
  while (true) {
    ++t.iterations;
    const double cand[3] = {c - s, c, c + s};
    double best = cand[0];
    double best_err = eval_once(cand[0]);
    for (int i = 1; i < 3; ++i) {
      const double e = eval_once(cand[i]);
      if (e < best_err) {
        best_err = e;
        best = cand[i];
      }
    }
    c = best;
    s *= 0.5;
    if (s <= cfg.min_spread) break;
  }
  t.center = c;
  t.center_error = cache.at(c);
  t.evaluations = cache.size();
  return t;
}

/// Multi-level search: evaluate 10^(c-s), 10^c, 10^(c+s), re-center on the
/// best, halve s; stop once s <= min_spread. Evaluated points are cached, so
/// every round after the first costs two new exact solves per fold.
inline CvReport mchol_search(const RidgeProblem& p, const MCholConfig& cfg, const FoldPlan& folds,
                             HoldoutMetric metric) {
  detail::check_folds(folds, p.samples());
  Stopwatch wall;
  CvReport report;
  report.method = Method::MChol;
  report.metric = metric.kind;
  report.folds = folds.active;

  std::vector<FoldSplit> splits;
  std::vector<double> assemble_time;
  for (std::size_t f = 0; f < folds.active; ++f) {
    Stopwatch sw;
    splits.push_back(split_fold(p.x, p.y, folds, f));
    assemble_time.push_back(sw.seconds());
  }
  auto evaluate = [&](double expo) {
    const double lambda = std::pow(10.0, expo);
    std::vector<CvRow> rows(splits.size());
    parallel_for(splits.size(), [&](std::size_t f) {
      CvRow& row = rows[f];
      row.fold = f;
      row.lambda = lambda;
      Stopwatch t;
      const CholeskyFactor l = cholesky_shifted(splits[f].train.h, lambda);
      row.timings.factorize = t.seconds();
      t.restart();
      const Vector theta = solve_chol(l, splits[f].train.g);
      row.timings.solve = t.seconds();
      t.restart();
      row.error = holdout_error(theta, splits[f].x_val, splits[f].y_val, metric);
      row.timings.predict = t.seconds();
    });
    double mean = 0.0;
    for (const auto& row : rows) mean += row.error;
    mean /= static_cast<double>(rows.size());
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.factorizations += rows.size();
    return mean;
  };
  const MCholTrace trace = mchol_minimize(evaluate, cfg);
  report.iterations = trace.iterations;

  for (std::size_t f = 0; f < splits.size(); ++f) {
    std::vector<CvRow*> mine;
    for (auto& row : report.rows)
      if (row.fold == f) mine.push_back(&row);
    for (auto* row : mine) row->timings.assemble += assemble_time[f] / static_cast<double>(mine.size());
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const CvRow& a, const CvRow& b) {
    return a.fold != b.fold ? a.fold < b.fold : a.lambda < b.lambda;
  });
  detail::finalize_report(report);
  // The search result is the final center, which is also the best evaluated point.
  report.best_lambda = std::pow(10.0, trace.center);
  report.best_error = trace.center_error;
  report.wall_seconds = wall.seconds();
  return report;
}

/// Least-squares polynomial of `degree` through (lambdas[i], values[i]),
/// evaluated at every point of `at`.
inline Vector interpolate_curve(std::span<const double> lambdas, std::span<const double> values,
                                std::size_t degree, std::span<const double> at,
                                const FitOptions& options = {}) {
  if (lambdas.size() != values.size()) throw DimensionMismatch("one value per lambda");
  detail::check_samples(lambdas, degree);
  double raw_cond = 0.0;
  const PolynomialBasis basis = detail::choose_basis(lambdas, degree, options, raw_cond);
  const DenseMatrix v = observation_matrix(lambdas, degree, basis);
  const DenseMatrix coef =
      fit_polynomials(v, DenseMatrix(1, values.size(), Vector(values.begin(), values.end())));
  Vector out(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    horner_columns<double>(coef.storage(), degree, basis.map(at[i]),
                           std::span<double>(&out[i], 1));
  }
  return out;
}

/// Fits one polynomial to exact hold-out errors at the sampled grid points
/// and selects the argmin of the interpolated error curve.
inline CvReport pinrmse_search(const RidgeProblem& p, const LambdaGrid& grid,
                               const FoldPlan& folds, HoldoutMetric metric,
                               std::size_t samples = 4, std::size_t degree = 2,
                               const FitOptions& options = {}) {
  detail::check_folds(folds, p.samples());
  if (samples <= degree) throw InsufficientSamples("need samples > degree");
  if (degree < 1) throw InvalidArgument("degree must be >= 1");
  const std::vector<std::size_t> idx = sample_indices(grid.size(), samples);
  Vector sample_lambdas;
  for (std::size_t i : idx) sample_lambdas.push_back(grid[i]);
  detail::check_samples(sample_lambdas, degree);

  Stopwatch wall;
  CvReport report;
  report.method = Method::PINRMSE;
  report.metric = metric.kind;
  report.folds = folds.active;
  const std::size_t q = grid.size();
  for (std::size_t f = 0; f < folds.active; ++f) {
    Stopwatch sw;
    const FoldSplit split = split_fold(p.x, p.y, folds, f);
    PhaseTimings shared;
    shared.assemble = sw.seconds();

    Vector errs(samples);
    std::vector<PhaseTimings> sample_t(samples);
    parallel_for(samples, [&](std::size_t s) {
      Stopwatch t;
      const CholeskyFactor l = cholesky_shifted(split.train.h, sample_lambdas[s]);
      sample_t[s].factorize = t.seconds();
      t.restart();
      const Vector theta = solve_chol(l, split.train.g);
      sample_t[s].solve = t.seconds();
      t.restart();
      errs[s] = holdout_error(theta, split.x_val, split.y_val, metric);
      sample_t[s].predict = t.seconds();
    });
    for (const auto& t : sample_t) shared += t;

    sw.restart();
    const Vector curve = interpolate_curve(sample_lambdas, errs, degree, grid.values, options);
    shared.interp = sw.seconds();

    std::vector<CvRow> rows(q);
    for (std::size_t i = 0; i < q; ++i) rows[i] = {f, grid[i], curve[i], {}};
    detail::spread(rows, shared);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.factorizations += samples;
  }
  detail::finalize_report(report);
  report.wall_seconds = wall.seconds();
  return report;
}

struct SvdConfig {
  Backend backend = Backend::SVD;
  std::size_t rank = 0;
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::uint64_t seed = 1;
};

/// One decomposition of the training design per fold, then the closed-form
/// shrinkage solve at every grid point.
inline CvReport grid_search_svd(const RidgeProblem& p, const LambdaGrid& grid,
                                const FoldPlan& folds, HoldoutMetric metric,
                                const SvdConfig& cfg = {}) {
  detail::check_folds(folds, p.samples());
  Stopwatch wall;
  CvReport report;
  report.method = cfg.backend == Backend::TSVD   ? Method::TSVD
                  : cfg.backend == Backend::RSVD ? Method::RSVD
                                                 : Method::SVD;
  if (cfg.backend != Backend::SVD && cfg.backend != Backend::TSVD &&
      cfg.backend != Backend::RSVD) {
    throw InvalidArgument("grid_search_svd needs an SVD backend");
  }
  report.metric = metric.kind;
  report.folds = folds.active;
  const std::size_t q = grid.size();
  for (std::size_t f = 0; f < folds.active; ++f) {
    Stopwatch sw;
    const FoldSplit split = split_fold(p.x, p.y, folds, f);
    PhaseTimings shared;
    shared.assemble = sw.seconds();
    sw.restart();
    SvdFactors fac;
    switch (cfg.backend) {
      case Backend::TSVD: fac = truncated_svd(split.train.x, cfg.rank); break;
      case Backend::RSVD:
        fac = randomized_svd(split.train.x, cfg.rank, cfg.oversample, cfg.power_iters,
                             cfg.seed + f);
        break;
      default: fac = svd(split.train.x); break;
    }
    shared.factorize = sw.seconds();
    std::vector<CvRow> rows(q);
    parallel_for(q, [&](std::size_t i) {
      CvRow& row = rows[i];
      row.fold = f;
      row.lambda = grid[i];
      Stopwatch t;
      const Solution s = solve_svd(split.train, fac, split.train.y, grid[i]);
      row.timings.solve = t.seconds();
      t.restart();
      row.error = holdout_error(s.theta, split.x_val, split.y_val, metric);
      row.timings.predict = t.seconds();
    });
    detail::spread(rows, shared);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    report.factorizations += 1;
  }
  detail::finalize_report(report);
  report.wall_seconds = wall.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCvCsvHeader =
    "method,fold,lambda,error,t_assemble,t_factorize,t_vec,t_fit,t_interp,t_solve,t_predict";

/// Number of leading CSV columns that are independent of timing.
inline constexpr std::size_t kCvCsvStableColumns = 4;

/// Per-(fold, lambda) rows followed by one "all" row per lambda holding the
/// mean error and mean per-fold timings.
inline void write_cv_csv(std::ostream& os, const CvReport& r) {
  os << kCvCsvHeader << '\n';
  auto emit = [&](std::string_view fold, double lambda, double error, const PhaseTimings& t) {
    os << to_string(r.method) << ',' << fold << ',' << format_double(lambda) << ','
       << format_double(error) << ',' << format_double(t.assemble) << ','
       << format_double(t.factorize) << ',' << format_double(t.vec) << ','
       << format_double(t.fit) << ',' << format_double(t.interp) << ','
       << format_double(t.solve) << ',' << format_double(t.predict) << '\n';
  };
  std::map<double, PhaseTimings> per_lambda;
  for (const auto& row : r.rows) {
    emit(std::to_string(row.fold), row.lambda, row.error, row.timings);
    per_lambda[row.lambda] += row.timings;
  }
  const double inv = r.folds > 0 ? 1.0 / static_cast<double>(r.folds) : 1.0;
  for (const auto& [l, e] : r.per_lambda_error) emit("all", l, e, per_lambda[l].scaled(inv));
}

}  // namespace ridgepath
