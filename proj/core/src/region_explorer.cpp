#include "mdr/region_explorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <thread>

#include "mdr/entropy_engine.hpp"
#include "mdr/errors.hpp"

namespace mdr {

namespace {

constexpr double kRhoEps = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual distortion of the private pair plus common codeword (no top):
// Var(X | U1, Y11, Y12) for private variance tied to d1.
double pair_distortion(double d1, double u, double rho) {
  if (is_absent(u)) return d1 * (1.0 + rho) / (2.0 + d1 * (rho - 1.0));
  return d1 * u * (1.0 + rho) / (2.0 * u + d1 * (rho - 1.0) * (1.0 + u));
}

std::optional<RegimeOptimum> minimize_regime(const DistortionSpec& spec, Regime regime,
                                             const OptimizerConfig& cfg) {
  const double boundary = three_node_rho_boundary(spec.d1, spec.d2);
  double lo = -0.5 + kRhoEps;
  double hi = 1.0 - kRhoEps;
  switch (regime) {
    case Regime::kCorrelationOnly:
    case Regime::kCommonMessage:
      hi = std::min(hi, boundary);
      break;
    case Regime::kResolutionInfo:
      lo = std::max(lo, boundary + kRhoEps);
      break;
  }
  if (!(lo < hi)) return std::nullopt;

  auto objective = [&](double rho) -> double {
    try {
      return theorem3_rates(three_node_params(spec, regime, rho)).r_total;
    } catch (const Error&) {
      return kInf;
    }
  };
  MinimizeResult best;
  try {
    best = minimize_scalar(objective, lo, hi, cfg);
  } catch (const NoFeasiblePoint&) {
    return std::nullopt;
  }
  RegimeOptimum out;
  out.regime = regime;
  out.rho = best.argmin;
  out.point = theorem3_rates(three_node_params(spec, regime, best.argmin));
  out.point.regime = regime;
  out.point.params = three_node_params(spec, regime, best.argmin);
  return out;
}

RatePoint best_of_regimes(const DistortionSpec& spec, const OptimizerConfig& cfg,
                          const std::vector<Regime>& regimes) {
  spec.validate();
  std::optional<RegimeOptimum> best;
  for (Regime regime : regimes) {
    auto candidate = minimize_regime(spec, regime, cfg);
    if (!candidate) continue;
    if (!best || candidate->point.r_total < best->point.r_total) best = candidate;
  }
  if (!best) throw NoFeasiblePoint("no three-node regime is feasible for this spec");
  return best->point;
}

}  // namespace

std::vector<RegimeOptimum> three_node_regime_optima(const DistortionSpec& spec,
                                                    const OptimizerConfig& cfg) {
  spec.validate();
  std::vector<RegimeOptimum> out;
  for (Regime regime :
       {Regime::kResolutionInfo, Regime::kCorrelationOnly, Regime::kCommonMessage}) {
    auto candidate = minimize_regime(spec, regime, cfg);
    if (candidate) out.push_back(*candidate);
  }
  return out;
}

RatePoint three_node_optimal(const DistortionSpec& spec, const OptimizerConfig& cfg) {
  return best_of_regimes(
      spec, cfg,
      {Regime::kCorrelationOnly, Regime::kCommonMessage, Regime::kResolutionInfo});
}

RatePoint three_node_optimal_no_common(const DistortionSpec& spec, const OptimizerConfig& cfg) {
  return best_of_regimes(spec, cfg, {Regime::kCorrelationOnly, Regime::kResolutionInfo});
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

struct OracleCandidate {
  bool valid = false;
  double r = kInf;
  double rr = kInf;
};

void consider(OracleCandidate& best, double r, double rr, bool lexicographic) {
  if (lexicographic) {
    // Repair-node rule: minimize R first, break ties (to grid resolution)
    // by the repair rate.
    if (r < best.r - 1e-9 || (std::abs(r - best.r) <= 1e-9 && rr < best.rr)) {
      best = {true, r, rr};
    }
  } else {
    if (r + rr < best.r + best.rr) best = {true, r, rr};
  }
}

std::vector<double> log_axis(double lo, double hi, int points) {
  std::vector<double> axis;
  axis.reserve(points + 1);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    axis.push_back(lo * std::pow(hi / lo, t));
  }
  axis.push_back(kAbsent);
  return axis;
}

}  // namespace

RatePoint brute_force_oracle(const DistortionSpec& spec, int n, const OracleGrid& grid) {
  spec.validate();
  if (n != 2 && n != 3) throw InvalidParams("oracle supports n = 2 or 3");
  if (grid.total_points() > 10'000'000L) {
    throw InvalidParams("oracle grid exceeds 1e7 points");
  }
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  const bool lexicographic = (n == 2);
  const double rho_lo = (n == 2) ? -0.95 : -0.5 + 1e-3;
  const double rho_hi = 0.995;

  std::vector<double> rho_axis;
  rho_axis.reserve(grid.rho_points + 1);
  for (int i = 0; i < grid.rho_points; ++i) {
    rho_axis.push_back(rho_lo + (rho_hi - rho_lo) * i / (grid.rho_points - 1));
  }
  if (std::find(rho_axis.begin(), rho_axis.end(), 0.0) == rho_axis.end()) {
    rho_axis.push_back(0.0);
  }
  const std::vector<double> u_axis = log_axis(grid.var_min, grid.var_max, grid.var_points);
  const std::vector<double> q_base = log_axis(grid.var_min, grid.var_max, grid.q_points);

  auto evaluate_chunk = [&](size_t begin, size_t end) -> OracleCandidate {
    OracleCandidate best;
    for (size_t ri = begin; ri < end; ++ri) {
      const double rho = rho_axis[ri];
      // Common-noise axis, plus the variance that meets d2 exactly with no
      // refinement stored (the d2-equality projection).
      std::vector<double> u_points = u_axis;
      {
        const double denom = 2.0 * d2 - d1 * (d2 * (1.0 - rho) + rho + 1.0);
        if (denom > 0.0) {
          const double u_eq = d1 * d2 * (1.0 - rho) / denom;
          if (u_eq > 0.0 && !is_absent(u_eq)) u_points.push_back(u_eq);
        }
      }
      for (const double u : u_points) {
        const double s = sigma_q1_for_d1(d1, u);
        ChannelParams params = ChannelParams::all_absent(n);
        params.layers[0].sigma_u_sq = u;
        params.layers[0].sigma_q_sq = s;
        params.layers[0].rho = rho;

        std::vector<double> q_points = q_base;
        if (!is_absent(s)) {
          const double pair = pair_distortion(d1, u, rho);
          if (pair > d2) {
            q_points.push_back(d2 * pair / (pair - d2));  // d2-equality projection
          }
        }
        for (const double q : q_points) {
          params.top_sigma_sq = q;
          try {
            const CovarianceModel model = CovarianceModel::build(params);
            VariableSet one_node;
            if (!is_absent(u)) one_node.add(u_label(1));
            if (!is_absent(s)) one_node.add(y_label(1, 1));
            if (one_node.empty()) continue;
            if (mmse_distortion(model, one_node) > d1 + 1e-6) continue;
            VariableSet two_nodes = one_node;
            if (!is_absent(s)) two_nodes.add(y_label(1, 2));
            if (!is_absent(q)) two_nodes.add("Ytop");
            if (mmse_distortion(model, two_nodes) > d2 + 1e-6) continue;

            const RatePoint rates =
                (n == 2) ? theorem4_rates(params) : theorem3_rates(params);
            consider(best, rates.r, rates.r_repair, lexicographic);
          } catch (const Error&) {
            continue;  // degenerate corner of the grid
          }
        }
      }
    }
    return best;
  };

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  const size_t chunk = (rho_axis.size() + workers - 1) / workers;
  std::vector<std::future<OracleCandidate>> futures;
  for (size_t begin = 0; begin < rho_axis.size(); begin += chunk) {
    const size_t end = std::min(begin + chunk, rho_axis.size());
    futures.push_back(std::async(std::launch::async, evaluate_chunk, begin, end));
  }
  OracleCandidate best;
  for (auto& f : futures) {
    const OracleCandidate c = f.get();
    if (c.valid) consider(best, c.r, c.rr, lexicographic);
  }
  if (!best.valid) throw NoFeasiblePoint("oracle grid contains no feasible point");
  return RatePoint::make(best.r, best.rr);
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

namespace {

// No-repair layered baseline with a single MDS-coded top codeword,
// optimized over the private correlation.
double modified_prp3_rate(const DistortionSpec& spec, const OptimizerConfig& cfg) {
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  auto objective = [&](double rho) -> double {
    try {
      ChannelParams params = ChannelParams::all_absent(3);
      params.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      params.layers[0].rho = rho;
      const double pair = pair_distortion(d1, kAbsent, rho);
      if (pair > d2) params.top_sigma_sq = d2 * pair / (pair - d2);
      return prop1_rate(params);
    } catch (const Error&) {
      return kInf;
    }
  };
  return minimize_scalar(objective, -0.5 + kRhoEps, 1.0 - kRhoEps, cfg).min;
}

// Unmodified layered baseline: the last layer keeps per-node codewords
// (conditionally independent noises), a reader decodes two of the three.
double prp3_rate(const DistortionSpec& spec, const OptimizerConfig& cfg) {
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  auto objective = [&](double rho) -> double {
    try {
      ChannelParams params = ChannelParams::all_absent(3);
      params.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      params.layers[0].rho = rho;
      const double pair = pair_distortion(d1, kAbsent, rho);
      const bool refine = pair > d2;
      if (refine) {
        params.layers[1].sigma_q_sq = 2.0 * d2 * pair / (pair - d2);
        params.layers[1].rho = 0.0;
      }
      const CovarianceModel model = CovarianceModel::build(params);
      const VariableSet y1_pair{y_label(1, 1), y_label(1, 2)};
      const VariableSet y1_all{y_label(1, 1), y_label(1, 2), y_label(1, 3)};
      double rate = cond_entropy(model, VariableSet{y_label(1, 1)}, VariableSet{}) -
                    cond_entropy(model, y1_all, VariableSet{"X"}) / 3.0;
      if (refine) {
        const VariableSet y2_pair{y_label(2, 1), y_label(2, 2)};
        const VariableSet y2_all{y_label(2, 1), y_label(2, 2), y_label(2, 3)};
        rate += cond_entropy(model, y2_pair, y1_pair) / 2.0;
        rate -= cond_entropy(model, y2_all, VariableSet{"X"}.united(y1_all)) / 3.0;
      }
      return rate;
    } catch (const Error&) {
      return kInf;
    }
  };
  return minimize_scalar(objective, -0.5 + kRhoEps, 1.0 - kRhoEps, cfg).min;
}

}  // namespace

SweepResult sweep(double d1, const std::vector<double>& d2_grid, const OptimizerConfig& cfg) {
  for (double d2 : d2_grid) {
    DistortionSpec{d1, d2}.validate();
  }
  SweepResult result;
  result.d1 = d1;
  result.cfg = cfg;
  result.rows.resize(d2_grid.size());

  std::vector<double> sorted = d2_grid;
  std::sort(sorted.begin(), sorted.end());

  auto compute_row = [&](size_t i) {
    const DistortionSpec spec{d1, sorted[i]};
    SweepRow row;
    row.d2 = sorted[i];
    row.ec2 = two_node_ec_baseline(spec, cfg);
    row.prp3 = prp3_rate(spec, cfg);
    row.modified_prp3 = modified_prp3_rate(spec, cfg);
    row.repair3_nocommon = three_node_optimal_no_common(spec, cfg).r_total;
    row.repair3_common = three_node_optimal(spec, cfg).r_total;
    row.twonode_total = two_node_optimal(spec).r_total;
    result.rows[i] = row;
  };

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> futures;
  std::atomic<size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      for (size_t i = next.fetch_add(1); i < sorted.size(); i = next.fetch_add(1)) {
        compute_row(i);
      }
    }));
  }
  for (auto& f : futures) f.get();
  return result;
}

std::string SweepResult::to_csv() const {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line),
                "# mdrepair sweep d1=%.9g rows=%zu grid_points=%d refine_iters=%d tol=%.9g\n",
                d1, rows.size(), cfg.grid_points, cfg.refine_iters, cfg.tol);
  out += line;
  out += "d2,ec2,prp3,modified_prp3,repair3_nocommon,repair3_common,twonode_total\n";
  for (const SweepRow& row : rows) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.d2, row.ec2,
                  row.prp3, row.modified_prp3, row.repair3_nocommon, row.repair3_common,
                  row.twonode_total);
    out += line;
  }
  return out;
}

}  // namespace mdr
