#pragma once

#include <limits>
#include <string>
#include <vector>

namespace mdr {

// Variance sentinel meaning "this codeword is not stored at all". Absent
// variables are omitted from covariance models entirely rather than being
// approximated by large finite variances.
inline constexpr double kAbsent = std::numeric_limits<double>::infinity();

inline bool is_absent(double sigma_sq) {
  return sigma_sq == std::numeric_limits<double>::infinity();
}

// Per-layer test-channel parameters of the symmetric scheme.
//   U_k     = X + Q_uk,  Var(Q_uk) = sigma_u_sq          (common codeword)
//   Y_{k,i} = X + Q_ki,  Var(Q_ki) = sigma_q_sq,         (private codewords)
//   E[Q_ki Q_kj] = rho * sigma_q_sq for i != j
struct LayerParams {
  double sigma_u_sq = kAbsent;
  double sigma_q_sq = kAbsent;
  double rho = 0.0;
};

// Symmetric Gaussian test channel for n nodes: layers k = 1..n-1 plus a
// single top codeword Y_top = X + Q_top. The top codeword sits at layer n-1
// for the distributed-repair evaluator and at layer n for the repair-node
// evaluator; only its variance lives here.
struct ChannelParams {
  int n = 2;
  std::vector<LayerParams> layers;  // size n-1, layers[k-1] is layer k
  double top_sigma_sq = kAbsent;

  // Throws InvalidParams when an invariant fails: n < 2, wrong layer count,
  // nonpositive variance, or a private-noise correlation matrix that is not
  // positive semidefinite (rho must lie in (-1/(n-1), 1]).
  void validate() const;

  bool layer_common_present(int k) const { return !is_absent(layers.at(k - 1).sigma_u_sq); }
  bool layer_private_present(int k) const { return !is_absent(layers.at(k - 1).sigma_q_sq); }
  bool top_present() const { return !is_absent(top_sigma_sq); }

  static ChannelParams all_absent(int n);
};

// JSON document form:
// {"n": int,
//  "layers": [{"sigma_u_sq": number|"inf", "sigma_q_sq": number|"inf", "rho": number}, ...],
//  "top_sigma_sq": number|"inf"}
// Parsing validates the schema and the parameter invariants.
ChannelParams channel_params_from_json(const std::string& text);
std::string channel_params_to_json(const ChannelParams& params, int indent = -1);

}  // namespace mdr
