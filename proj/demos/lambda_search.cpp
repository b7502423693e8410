// Cross-validated lambda selection with each search strategy.
#include <cstdio>

#include "ridgepath/ridgepath.hpp"

using namespace ridgepath;

int main() {
  SynthSpec spec;
  spec.n = 300;
  spec.d = 48;
  spec.noise_sigma = 0.5;
  const SynthData data = generate(spec);
  const RidgeProblem p = assemble(data.x, data.y);
  const FoldPlan folds = make_folds(p.y, 5, 11);
  const HoldoutMetric metric = default_metric(p.y);
  const LambdaGrid grid = LambdaGrid::make(1e-3, 1.0, 31);

  auto show = [](const CvReport& r) {
    std::printf("%-8s best_lambda=%-10.4g error=%-10.5g factorizations=%-4zu %.4fs\n",
                std::string(to_string(r.method)).c_str(), r.best_lambda, r.best_error,
                r.factorizations, r.wall_seconds);
  };
  show(grid_search_exact(p, grid, folds, metric));
  show(grid_search_pichol(p, grid, folds, metric));
  show(mchol_search(p, MCholConfig{}, folds, metric));
  show(pinrmse_search(p, grid, folds, metric));
  show(grid_search_svd(p, grid, folds, metric));
  return 0;
}
