#pragma once

#include <functional>

namespace mdr {

struct OptimizerConfig {
  int grid_points = 512;   // coarse scan resolution, >= 8
  int refine_iters = 60;   // golden-section iterations around the best cell
  double tol = 1e-10;      // argument tolerance for refinement
};

struct MinimizeResult {
  double argmin = 0.0;
  double min = 0.0;
};

// Bounded scalar minimization: coarse grid scan over [lo, hi] followed by
// golden-section refinement around the best grid cell. Invalid points must
// be signalled by f returning +infinity; if f is +infinity on the whole
// grid, throws NoFeasiblePoint.
MinimizeResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                               const OptimizerConfig& cfg = {});

}  // namespace mdr
