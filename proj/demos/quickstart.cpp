// Fit interpolated Cholesky factors on a synthetic problem and compare
// solutions against exact solves along the path.
#include <cmath>
#include <cstdio>

#include "ridgepath/ridgepath.hpp"

using namespace ridgepath;

int main() {
  SynthSpec spec;
  spec.n = 400;
  spec.d = 64;
  const SynthData data = generate(spec);
  const RidgeProblem p = assemble(data.x, data.y);

  const Vector samples = log_space(1e-2, 1.0, 4);
  const InterpModel model =
      fit(p.h, samples, 2, build_layout(LayoutKind::Recursive, p.order()));
  std::printf("fit %zu entries, cond(V)=%.3g\n", model.entries(), model.cond_v);

  std::printf("%10s %12s %12s\n", "lambda", "nrmse", "rel_theta");
  for (double l : log_space(1e-2, 1.0, 9)) {
    const CholeskyFactor approx = eval(model, l);
    const CholeskyFactor exact = cholesky_shifted(p.h, l);
    const Solution a = solve_interp(p, model, l);
    const Solution b = solve_exact(p, l);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.theta.size(); ++i) {
      num += (a.theta[i] - b.theta[i]) * (a.theta[i] - b.theta[i]);
      den += b.theta[i] * b.theta[i];
    }
    std::printf("%10.4g %12.3e %12.3e\n", l, factor_nrmse(approx, exact), std::sqrt(num / den));
  }
  return 0;
}
