#include "mdr/closed_form.hpp"

#include <cmath>

#include "mdr/entropy_engine.hpp"
#include "mdr/errors.hpp"

namespace mdr {

namespace {

double log2d(double x) { return std::log2(x); }

constexpr double kRhoEps = 1e-6;
constexpr double kHugeVariance = 1e10;  // beyond this a codeword is treated as absent

}  // namespace

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::kResolutionInfo: return "resolution-info";
    case Regime::kCorrelationOnly: return "correlation-only";
    case Regime::kCommonMessage: return "common-message";
  }
  return "unknown";
}

void DistortionSpec::validate() const {
  if (!(d1 > 0.0 && d1 < 1.0 && d2 > 0.0 && d2 <= d1)) {
    throw InvalidParams("need 0 < d2 <= d1 < 1, got d1=" + std::to_string(d1) +
                        " d2=" + std::to_string(d2));
  }
}

double sigma_q1_for_d1(double d1, double u) {
  if (is_absent(u)) return d1 / (1.0 - d1);
  const double denom = u - d1 * u - d1;
  if (denom <= 0.0) return kAbsent;  // common codeword alone already reaches d1
  return d1 * u / denom;
}

// ---------------------------------------------------------------------------
// Two-node closed forms
// ---------------------------------------------------------------------------

namespace {

// Residual distortion of the private pair plus common codeword, before any
// refinement: Var(X | U1, Y11, Y12).
double pair_distortion(double d1, double u, double rho) {
  if (is_absent(u)) return d1 * (1.0 + rho) / (2.0 + d1 * (rho - 1.0));
  return d1 * u * (1.0 + rho) / (2.0 * u + d1 * (rho - 1.0) * (1.0 + u));
}

}  // namespace

double two_node_rate_formula(double d1, double u, double q, double rho) {
  const double t1 = is_absent(u) ? 0.0 : 0.5 * log2d(1.0 + 1.0 / u);
  const double ufac = is_absent(u) ? 1.0 : u / (u + 1.0);
  const double t2 = 0.5 * log2d(ufac / (std::sqrt(1.0 - rho * rho) * d1));
  double t3 = 0.0;
  if (!is_absent(q)) {
    t3 = 0.25 * log2d(1.0 + pair_distortion(d1, u, rho) / q);
  }
  return t1 + t2 + t3;
}

double two_node_repair_formula(double d1, double u, double q, double rho) {
  const double base =
      is_absent(u) ? (2.0 + d1 * (rho - 1.0)) : (2.0 * u + d1 * (rho - 1.0) * (1.0 + u)) / u;
  const double t1 = 0.5 * log2d((1.0 - rho) * base / std::sqrt(1.0 - rho * rho));
  double t2 = 0.0;
  if (!is_absent(q)) {
    t2 = 0.25 * log2d(1.0 + pair_distortion(d1, u, rho) / q);
  }
  return t1 + t2;
}

Regime two_node_regime(const DistortionSpec& spec) {
  spec.validate();
  if (spec.d2 >= spec.d1 / (2.0 - spec.d1)) return Regime::kCommonMessage;
  if (spec.d2 <= 2.0 * spec.d1 - 1.0) return Regime::kResolutionInfo;
  return Regime::kCorrelationOnly;
}

ChannelParams two_node_params(const DistortionSpec& spec, Regime regime) {
  spec.validate();
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  ChannelParams p = ChannelParams::all_absent(2);
  switch (regime) {
    case Regime::kCommonMessage: {
      const double u = d1 * d2 / (2.0 * d2 - d1 * d2 - d1);
      if (u <= 0.0) throw InvalidParams("common-message regime invalid for this pair");
      p.layers[0].sigma_u_sq = u;
      p.layers[0].sigma_q_sq = sigma_q1_for_d1(d1, u);
      p.layers[0].rho = 0.0;
      break;
    }
    case Regime::kCorrelationOnly: {
      p.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      p.layers[0].rho = (d1 * d2 + d1 - 2.0 * d2) / (d1 * (d2 - 1.0));
      break;
    }
    case Regime::kResolutionInfo: {
      p.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      p.layers[0].rho = (d1 - 1.0) / d1;
      const double base = 2.0 * d1 - 1.0;  // pair distortion at this correlation
      if (base - d2 > 1e-15) p.top_sigma_sq = d2 * base / (base - d2);
      break;
    }
  }
  return p;
}

RatePoint two_node_optimal(const DistortionSpec& spec) {
  const Regime regime = two_node_regime(spec);
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  double r = 0.0;
  double rr = 0.0;
  switch (regime) {
    case Regime::kCommonMessage:
      r = 0.5 * log2d(1.0 / d1);
      rr = 0.5 * log2d(d1 / d2);
      break;
    case Regime::kCorrelationOnly:
      r = 0.5 * log2d((1.0 - d2) / (2.0 * std::sqrt((1.0 - d1) * d2 * (d1 - d2))));
      rr = 0.5 * log2d(2.0 * std::sqrt((1.0 - d1) * (d1 - d2)) / ((1.0 - d2) * std::sqrt(d2)));
      break;
    case Regime::kResolutionInfo:
      r = 0.25 * log2d(1.0 / d2);
      rr = r;
      break;
  }
  RatePoint point = RatePoint::make(r, rr);
  point.regime = regime;
  point.params = two_node_params(spec, regime);
  return point;
}

double two_node_ec_baseline(const DistortionSpec& spec, const OptimizerConfig& cfg) {
  spec.validate();
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  auto objective = [&](double rho) -> double {
    const double pair = pair_distortion(d1, kAbsent, rho);
    double q = kAbsent;
    if (pair > d2) {
      q = d2 * pair / (pair - d2);
    }
    return two_node_rate_formula(d1, kAbsent, q, rho);
  };
  return minimize_scalar(objective, -1.0 + kRhoEps, 1.0 - kRhoEps, cfg).min;
}

// ---------------------------------------------------------------------------
// Three-node closed forms
// ---------------------------------------------------------------------------

namespace {

// cbrt((rho-1)^2 (2 rho + 1)); positive on the domain rho in (-1/2, 1).
double triple_det_root(double rho) {
  return std::cbrt((rho - 1.0) * (rho - 1.0) * (2.0 * rho + 1.0));
}

void check_rho3(double rho) {
  if (!(rho > -0.5 && rho < 1.0)) {
    throw InvalidParams("three-node correlation must lie in (-1/2, 1), got " +
                        std::to_string(rho));
  }
}

}  // namespace

double three_node_rate_formula(double u, double s, double q, double rho) {
  check_rho3(rho);
  const double zeta = triple_det_root(rho);
  const double t1 = is_absent(u) ? 0.0 : 0.5 * log2d(1.0 + 1.0 / u);
  const double shrink = is_absent(u) ? 0.0 : 1.0 / (1.0 + u);
  const double t2 = 0.5 * log2d((1.0 + s - shrink) / (zeta * s));
  double t3 = 0.0;
  if (!is_absent(q)) {
    double ratio;
    if (is_absent(u)) {
      ratio = ((rho + 1.0) * s * (q + 1.0) + 2.0 * q) / (((rho + 1.0) * s + 2.0) * q);
    } else {
      ratio = ((rho + 1.0) * s * (q * u + q + u) + 2.0 * q * u) /
              (((rho + 1.0) * s * (u + 1.0) + 2.0 * u) * q);
    }
    t3 = 0.25 * log2d(ratio);
  }
  return t1 + t2 + t3;
}

double three_node_repair_formula(double u, double s, double rho) {
  check_rho3(rho);
  const double zeta = triple_det_root(rho);
  double num, den;
  if (is_absent(u)) {
    num = (2.0 * rho + 1.0) * s + 3.0;
    den = (rho + 1.0) * s + 2.0;
  } else {
    num = (2.0 * rho + 1.0) * s * (u + 1.0) + 3.0 * u;
    den = (rho + 1.0) * s * (u + 1.0) + 2.0 * u;
  }
  return 0.25 * log2d((1.0 - rho) * num / (den * zeta));
}

double three_node_total_correlation_only(double d1, double rho) {
  check_rho3(rho);
  const double inner = (2.0 * d1 * (rho - 1.0) + 3.0) /
                       ((-2.0 * rho * rho + rho + 1.0) * (d1 * (rho - 1.0) + 2.0));
  return 0.5 * log2d(std::sqrt(inner) / d1);
}

double three_node_total_common_message(double d1, double d2, double rho) {
  check_rho3(rho);
  const double inner = std::abs(d2 - 2.0 * d1 * (rho + 1.0)) / (d1 * (2.0 * rho + 1.0));
  return 0.5 * log2d(d2 * std::sqrt(inner) / std::abs(d1 * rho + d1 - 2.0 * d2));
}

double three_node_total_resolution(double d1, double d2, double rho) {
  check_rho3(rho);
  const double inner = d1 * (rho + 1.0) / (d2 * (d1 * (rho - 1.0) + 2.0));
  return 0.5 * log2d(std::sqrt(inner) / (d1 * triple_det_root(rho)));
}

double three_node_rho_boundary(double d1, double d2) {
  return (2.0 * d2 - d1 * d2 - d1) / (d1 * (1.0 - d2));
}

ChannelParams three_node_params(const DistortionSpec& spec, Regime regime, double rho) {
  spec.validate();
  check_rho3(rho);
  const double d1 = spec.d1;
  const double d2 = spec.d2;
  const double boundary = three_node_rho_boundary(d1, d2);
  ChannelParams p = ChannelParams::all_absent(3);

  switch (regime) {
    case Regime::kCorrelationOnly: {
      if (rho > boundary + 1e-12) {
        throw InvalidParams("correlation-only regime needs rho <= validity boundary");
      }
      p.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      p.layers[0].rho = rho;
      break;
    }
    case Regime::kCommonMessage: {
      if (!(rho < boundary)) {
        throw InvalidParams("common-message regime needs rho < validity boundary");
      }
      double u = d1 * d2 * (1.0 - rho) / (2.0 * d2 - d1 * (d2 * (1.0 - rho) + rho + 1.0));
      if (u <= 0.0) throw InvalidParams("common-message regime infeasible at this rho");
      if (u > kHugeVariance) u = kAbsent;
      p.layers[0].sigma_u_sq = u;
      if (d1 - d2 < 1e-14) {
        p.layers[0].sigma_q_sq = kAbsent;  // identical copies: common codeword only
      } else {
        p.layers[0].sigma_q_sq = (1.0 - rho) * d1 * d2 / ((1.0 + rho) * (d1 - d2));
        p.layers[0].rho = rho;
      }
      break;
    }
    case Regime::kResolutionInfo: {
      if (!(rho > boundary)) {
        throw InvalidParams("resolution regime needs rho > validity boundary");
      }
      p.layers[0].sigma_q_sq = d1 / (1.0 - d1);
      p.layers[0].rho = rho;
      const double q =
          d1 * d2 * (rho + 1.0) / (d1 * (d2 * (1.0 - rho) + rho + 1.0) - 2.0 * d2);
      if (q <= 0.0) throw InvalidParams("resolution regime infeasible at this rho");
      p.top_sigma_sq = q > kHugeVariance ? kAbsent : q;
      break;
    }
  }
  return p;
}

ThreeNodeRegimeRates three_node_regime_rates(const DistortionSpec& spec, double rho) {
  spec.validate();
  check_rho3(rho);
  const double boundary = three_node_rho_boundary(spec.d1, spec.d2);

  auto evaluate = [&](Regime regime, double transcription) -> RegimeRate {
    const ChannelParams params = three_node_params(spec, regime, rho);
    const RatePoint point = theorem3_rates(params);
    RegimeRate out;
    out.r_total = point.r_total;
    out.r = point.r;
    out.r_repair = point.r_repair;
    out.transcription = transcription;
    out.transcription_ok = std::abs(transcription - point.r_total) <= 1e-6;
    return out;
  };

  ThreeNodeRegimeRates rates;
  if (rho <= boundary) {
    rates.correlation_only =
        evaluate(Regime::kCorrelationOnly, three_node_total_correlation_only(spec.d1, rho));
  }
  if (rho < boundary) {
    rates.common_message = evaluate(
        Regime::kCommonMessage, three_node_total_common_message(spec.d1, spec.d2, rho));
  }
  if (rho > boundary) {
    rates.resolution_info = evaluate(
        Regime::kResolutionInfo, three_node_total_resolution(spec.d1, spec.d2, rho));
  }
  return rates;
}

}  // namespace mdr
