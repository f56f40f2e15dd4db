#include "mdr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdr/errors.hpp"

namespace mdr {

MinimizeResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                               const OptimizerConfig& cfg) {
  if (!(lo < hi)) throw InvalidParams("minimize_scalar: need lo < hi");
  const int grid = std::max(cfg.grid_points, 8);

  double best_x = std::numeric_limits<double>::quiet_NaN();
  double best_f = std::numeric_limits<double>::infinity();
  int best_i = -1;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
      best_i = i;
    }
  }
  if (best_i < 0 || !std::isfinite(best_f)) {
    throw NoFeasiblePoint("minimize_scalar: objective is infinite on the whole grid");
  }

  // Golden-section refinement on the bracket spanned by the neighbours of
  // the best cell.
  const double step = (hi - lo) / (grid - 1);
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < cfg.refine_iters && (b - a) > cfg.tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = f(mid);

  MinimizeResult result{best_x, best_f};
  if (fc < result.min) result = {c, fc};
  if (fd < result.min) result = {d, fd};
  if (fmid < result.min) result = {mid, fmid};
  return result;
}

}  // namespace mdr
