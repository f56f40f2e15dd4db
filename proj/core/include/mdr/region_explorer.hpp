#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdr/closed_form.hpp"
#include "mdr/optimize.hpp"
#include "mdr/rate_point.hpp"

namespace mdr {

// Minimum of R + R_r over the correlation within one regime's valid
// interval of (-1/2, 1), evaluated through the entropy engine.
struct RegimeOptimum {
  Regime regime = Regime::kCorrelationOnly;
  double rho = 0.0;
  RatePoint point;
};

// Feasible regimes with their per-regime optima, in enum order.
std::vector<RegimeOptimum> three_node_regime_optima(const DistortionSpec& spec,
                                                    const OptimizerConfig& cfg = {});

// Best distributed-repair point for three nodes: minimizes R + R_r over the
// correlation within each regime's valid interval of (-1/2, 1) and returns
// the regime-wise minimum with its achieving parameters. R and R_r are
// evaluated through the entropy engine at the argmin.
RatePoint three_node_optimal(const DistortionSpec& spec, const OptimizerConfig& cfg = {});

// Same minimization restricted to schemes without a common codeword
// (correlation-only and resolution regimes).
RatePoint three_node_optimal_no_common(const DistortionSpec& spec,
                                       const OptimizerConfig& cfg = {});

// Per-parameter grid specification for the brute-force oracle. Variance
// axes are log-spaced and always include the absent sentinel plus, for each
// correlation, the point projected onto the d2-equality manifold.
struct OracleGrid {
  int rho_points = 200;
  int var_points = 48;  // common-noise axis
  int q_points = 8;     // refinement-noise axis
  double var_min = 1e-3;
  double var_max = 1e3;

  long total_points() const {
    return static_cast<long>(rho_points + 1) * (var_points + 2) * (q_points + 3);
  }
};

// Exhaustive grid search over (rho, sigma_u^2, sigma_top^2) with the
// private variance eliminated by the one-node distortion constraint. Every
// candidate is feasibility-checked through mmse_distortion with 1e-6 slack
// and rated through the entropy engine. For n = 2 the repair-node rule
// applies (minimize R, then R_r); for n = 3 the distributed rule
// (minimize R + R_r). Throws NoFeasiblePoint when nothing qualifies.
RatePoint brute_force_oracle(const DistortionSpec& spec, int n, const OracleGrid& grid = {});

struct SweepRow {
  double d2 = 0.0;
  double ec2 = 0.0;
  double prp3 = 0.0;
  double modified_prp3 = 0.0;
  double repair3_nocommon = 0.0;
  double repair3_common = 0.0;
  double twonode_total = 0.0;
};

struct SweepResult {
  double d1 = 0.0;
  std::vector<SweepRow> rows;  // sorted by d2 ascending
  OptimizerConfig cfg;

  // CSV with a '#'-prefixed metadata header; float fields use 9 significant
  // digits. Byte-identical across reruns with equal inputs.
  std::string to_csv() const;
};

// Figure-style curve family at fixed d1. Rows are independent and computed
// in parallel; results are deterministic regardless of scheduling.
SweepResult sweep(double d1, const std::vector<double>& d2_grid,
                  const OptimizerConfig& cfg = {});

}  // namespace mdr
