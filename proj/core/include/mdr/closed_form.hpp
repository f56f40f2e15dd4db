#pragma once

#include <optional>

#include "mdr/optimize.hpp"
#include "mdr/rate_point.hpp"

namespace mdr {

// ---------------------------------------------------------------------------
// Two nodes (collaborative repair node). All rates in bits per sample,
// source variance 1, distortions are mean-squared error.
// ---------------------------------------------------------------------------

// Private-noise variance that meets the one-node target d1 with equality,
// given the common-noise variance u (kAbsent for no common codeword).
// Returns kAbsent when the common codeword alone already reaches d1.
double sigma_q1_for_d1(double d1, double u);

// Closed-form operational rate R(d1, u, q, rho) of the two-node layered
// Gaussian channel (common variance u, refinement variance q, private
// correlation rho; u and q accept the absent sentinel).
double two_node_rate_formula(double d1, double u, double q, double rho);

// Matching repair rate. The refinement contribution enters with weight 1/4:
// the repair node keeps one (2,1)-coded share of the refinement stream, the
// same share size each operational node keeps.
double two_node_repair_formula(double d1, double u, double q, double rho);

// Regime selection for the optimal two-node scheme. Boundary ties resolve
// to the common-message side at d2 = d1/(2-d1) and the resolution side at
// d2 = 2 d1 - 1; both formulas coincide there.
Regime two_node_regime(const DistortionSpec& spec);

// Optimal (R, R_r) with achieving channel parameters. Satisfies
// r + r_repair = (1/2) log2(1/d2) exactly in all three regimes.
RatePoint two_node_optimal(const DistortionSpec& spec);

// Optimal symmetric per-node rate of the classic two-description scheme
// with independently generated codewords (no common message): minimizes the
// operational rate over (rho, q) subject to both distortion targets. Used
// as the bottom baseline curve of the sweeps.
double two_node_ec_baseline(const DistortionSpec& spec, const OptimizerConfig& cfg = {});

// Achieving parameters per regime (top codeword = refinement).
ChannelParams two_node_params(const DistortionSpec& spec, Regime regime);

// ---------------------------------------------------------------------------
// Three nodes (distributed repair), at most two nodes read.
// ---------------------------------------------------------------------------

// Generic closed forms in the raw channel parameters (u common, s private,
// q top variance, rho private correlation; rho in (-1/2, 1)).
double three_node_rate_formula(double u, double s, double q, double rho);
double three_node_repair_formula(double u, double s, double rho);  // unclamped

// Per-regime total-rate transcriptions R_t(rho) in terms of (d1, d2, rho).
// These mirror the printed expressions (with absolute-value sign fixes) and
// are validated against the entropy engine; see ThreeNodeRegimeRates.
double three_node_total_correlation_only(double d1, double rho);
double three_node_total_common_message(double d1, double d2, double rho);
double three_node_total_resolution(double d1, double d2, double rho);

// Shared validity boundary: common message valid below, resolution above.
double three_node_rho_boundary(double d1, double d2);

// Channel parameters achieving (d1, d2) in a given regime at correlation
// rho. Throws InvalidParams when rho is outside the regime's valid range.
ChannelParams three_node_params(const DistortionSpec& spec, Regime regime, double rho);

struct RegimeRate {
  double r_total = 0.0;          // entropy-engine value (authoritative)
  double r = 0.0;
  double r_repair = 0.0;
  double transcription = 0.0;    // printed closed form, sign-corrected
  bool transcription_ok = false; // |transcription - r_total| <= 1e-6
};

struct ThreeNodeRegimeRates {
  std::optional<RegimeRate> correlation_only;
  std::optional<RegimeRate> common_message;
  std::optional<RegimeRate> resolution_info;
};

// Evaluates all regimes valid at this rho: absent entries mean the regime's
// validity constraint excludes rho. rho must lie in (-1/2, 1).
ThreeNodeRegimeRates three_node_regime_rates(const DistortionSpec& spec, double rho);

}  // namespace mdr
