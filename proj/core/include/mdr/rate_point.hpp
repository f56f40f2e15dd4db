#pragma once

#include <optional>
#include <string>

#include "mdr/channel_params.hpp"

namespace mdr {

// Which information types are active at a two- or three-node optimum.
enum class Regime {
  kResolutionInfo,   // refinement codeword stored, no common message
  kCorrelationOnly,  // neither refinement nor common message
  kCommonMessage,    // common message stored, no refinement
};

std::string regime_name(Regime regime);  // "resolution-info", ...

// Mean-squared-error targets for a unit-variance source. d1 applies to any
// single node, d2 to any pair (the largest subset the distributed-repair
// variant ever reads for n = 3; general n keeps the same two knobs).
struct DistortionSpec {
  double d1 = 0.5;
  double d2 = 0.5;

  // Throws InvalidParams unless 0 < d2 <= d1 < 1.
  void validate() const;
};

// An operational/repair rate pair in bits per source sample.
struct RatePoint {
  double r = 0.0;
  double r_repair = 0.0;
  double r_total = 0.0;  // always r + r_repair

  std::optional<Regime> regime;
  std::optional<ChannelParams> params;  // achieving test channel, when known

  static RatePoint make(double r, double r_repair) {
    RatePoint p;
    p.r = r;
    p.r_repair = r_repair;
    p.r_total = r + r_repair;
    return p;
  }
};

}  // namespace mdr
