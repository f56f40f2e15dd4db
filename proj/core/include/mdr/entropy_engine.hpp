#pragma once

#include <string>
#include <vector>

#include "mdr/covariance.hpp"
#include "mdr/rate_point.hpp"

namespace mdr {

// Differential entropies in bits. h(a | b) = (1/2) log2((2 pi e)^|a| det S)
// where S is the Schur complement of the b-block in the joint covariance.
// b may be empty (unconditional entropy). Values can be negative.
//
// Throws DegenerateConditioning when a symmetric factorization of the
// conditioning block (or of the joint) hits a pivot below 1e-12; callers
// should move to limit-form parameters (absent variables) instead.
double cond_entropy(const CovarianceModel& model, const VariableSet& a, const VariableSet& b);

inline double entropy(const CovarianceModel& model, const VariableSet& a) {
  return cond_entropy(model, a, VariableSet{});
}

// I(a; b) = h(a) - h(a | b), clamped to zero when a tiny negative rounding
// residue (> -1e-9) appears.
double mutual_information(const CovarianceModel& model, const VariableSet& a,
                          const VariableSet& b);

// Linear-MMSE error of estimating X from the observed variables,
// Var(X | observed) in (0, 1].
double mmse_distortion(const CovarianceModel& model, const VariableSet& observed);

// One weighted entropy term of a rate expression, kept for auditability.
struct RateTerm {
  std::string name;    // e.g. "1/2 [h(U2|Y1_1,Y1_2,U1) - h(U2|X,...)]"
  double value = 0.0;  // weighted contribution in bits
};

struct RateBreakdown {
  std::vector<RateTerm> r_terms;
  std::vector<RateTerm> rr_terms;  // per-layer repair brackets, unclamped
  double r = 0.0;
  double r_repair = 0.0;  // with each layer bracket clamped at zero
  double r_repair_unclamped = 0.0;
};

// Achievable (R, R_r) for symmetric distributed repair: layers k = 1..n-2
// carry an optional common codeword and optional correlated private
// codewords, the top codeword sits at layer n-1 and is shared with an
// (n, n-1) MDS code, so it needs no dedicated repair information. Layer
// n-1's common/private slots must be absent. Requires n >= 3.
RatePoint theorem3_rates(const ChannelParams& params, RateBreakdown* breakdown = nullptr);

// Achievable (R, R_r) for a collaborative repair node: layers k = 1..n-1
// plus a top codeword at layer n. The repair node additionally stores its
// share of the top codeword. Requires n >= 2; for n = 2 this is the
// Zhang-Berger two-node scheme.
RatePoint theorem4_rates(const ChannelParams& params, RateBreakdown* breakdown = nullptr);

// No-repair baseline rate: private layers only (no common codewords
// allowed), reconstruction from at most n-1 nodes, single MDS-coded top
// codeword at layer n-1. Requires n >= 3.
double prop1_rate(const ChannelParams& params, RateBreakdown* breakdown = nullptr);

}  // namespace mdr
