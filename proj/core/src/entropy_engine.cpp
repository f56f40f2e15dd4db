#include "mdr/entropy_engine.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mdr/errors.hpp"

namespace mdr {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kMiClampTol = 1e-9;

// log2 det of a PSD matrix through a pivoted LDL^T factorization. Throws
// DegenerateConditioning when a pivot drops below tolerance.
double log2_det(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return 0.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success) {
    throw DegenerateConditioning(std::string(what) + ": LDLT factorization failed");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double pivot = ldlt.vectorD()(i);
    if (!(pivot >= kPivotTol)) {
      std::ostringstream os;
      os << what << ": singular beyond tolerance, pivot " << pivot;
      throw DegenerateConditioning(os.str());
    }
    acc += std::log2(pivot);
  }
  return acc;
}

const double kLog2TwoPiE = std::log2(2.0 * std::numbers::pi * std::numbers::e);

}  // namespace

double cond_entropy(const CovarianceModel& model, const VariableSet& a, const VariableSet& b) {
  if (a.empty()) throw InvalidParams("cond_entropy: a must be nonempty");
  for (const auto& l : a.labels()) {
    if (b.contains(l)) throw InvalidParams("cond_entropy: a and b overlap on " + l);
  }
  const auto ia = model.indices(a);
  const auto ib = model.indices(b);

  // det of the Schur complement S_aa - S_ab S_bb^-1 S_ba equals
  // det S_{ab,ab} / det S_bb, so two factorizations suffice.
  std::vector<int> joint = ib;
  joint.insert(joint.end(), ia.begin(), ia.end());
  const double ld_joint = log2_det(model.block(joint, joint), "joint covariance");
  const double ld_b = log2_det(model.block(ib, ib), "conditioning covariance");

  return 0.5 * (static_cast<double>(ia.size()) * kLog2TwoPiE + ld_joint - ld_b);
}

double mutual_information(const CovarianceModel& model, const VariableSet& a,
                          const VariableSet& b) {
  const double mi = cond_entropy(model, a, VariableSet{}) - cond_entropy(model, a, b);
  if (mi < 0.0) {
    if (mi < -kMiClampTol) {
      std::ostringstream os;
      os << "mutual information " << mi << " below clamp tolerance";
      throw DegenerateConditioning(os.str());
    }
    return 0.0;
  }
  return mi;
}

double mmse_distortion(const CovarianceModel& model, const VariableSet& observed) {
  if (observed.empty()) throw InvalidParams("mmse_distortion: observed set is empty");
  if (observed.contains("X")) throw InvalidParams("mmse_distortion: X cannot observe itself");
  const auto io = model.indices(observed);
  const std::vector<int> ix{model.index_of("X")};

  const Eigen::MatrixXd s_oo = model.block(io, io);
  const Eigen::VectorXd s_ox = model.block(io, ix).col(0);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s_oo);
  if (ldlt.info() != Eigen::Success) {
    throw DegenerateConditioning("mmse_distortion: factorization failed");
  }
  for (Eigen::Index i = 0; i < s_oo.rows(); ++i) {
    if (!(ldlt.vectorD()(i) >= kPivotTol)) {
      throw DegenerateConditioning("mmse_distortion: observation covariance singular");
    }
  }
  return 1.0 - s_ox.dot(ldlt.solve(s_ox));
}

namespace {

// Shared scaffolding for the layered rate expressions.
struct LayerSets {
  const ChannelParams& params;
  const CovarianceModel& model;
  int n;

  bool common(int k) const { return k >= 1 && params.layer_common_present(k); }
  bool priv(int k) const { return k >= 1 && params.layer_private_present(k); }

  // All U_j for present common layers j <= k.
  VariableSet u_upto(int k) const {
    VariableSet s;
    for (int j = 1; j <= k; ++j) {
      if (common(j)) s.add(u_label(j));
    }
    return s;
  }
  // All Y_{j,i} for present private layers j <= k, nodes i <= m.
  VariableSet y_upto(int k, int m) const {
    VariableSet s;
    for (int j = 1; j <= k; ++j) {
      if (!priv(j)) continue;
      for (int i = 1; i <= m; ++i) s.add(y_label(j, i));
    }
    return s;
  }
  VariableSet y_layer(int k, int m_first) const {
    VariableSet s;
    for (int i = 1; i <= m_first; ++i) s.add(y_label(k, i));
    return s;
  }
  static VariableSet with_x(VariableSet s) {
    VariableSet out{"X"};
    return out.united(s);
  }
};

std::string term_name(const std::string& body, int denom) {
  if (denom == 1) return body;
  return "1/" + std::to_string(denom) + " " + body;
}

// Common-codeword rate share of layer k (holds for both repair variants):
// (1/k) [ h(U_k | Y_{<=k-1, <=k}, U_{<k}) - h(U_k | X, Y_{<=k-1, <=n}, U_{<k}) ]
double common_layer_term(const LayerSets& ls, int k, std::vector<RateTerm>* terms) {
  const VariableSet uk{u_label(k)};
  const VariableSet prior_u = ls.u_upto(k - 1);
  const double plus = cond_entropy(ls.model, uk, ls.y_upto(k - 1, k).united(prior_u));
  const double minus =
      cond_entropy(ls.model, uk, LayerSets::with_x(ls.y_upto(k - 1, ls.n).united(prior_u)));
  const double value = (plus - minus) / k;
  if (terms) terms->push_back({term_name("[h(U" + std::to_string(k) + "|past) - h(U" +
                                             std::to_string(k) + "|X,past)]",
                                         k),
                               value});
  return value;
}

// Private-codeword rate share of layer k, without the joint -1/n H(...|X,U)
// part that is accounted once across all layers:
// (1/k) h(Y_{k,1..k} | Y_{<=k-1, <=k}, U_{<=k})
double private_layer_term(const LayerSets& ls, int k, std::vector<RateTerm>* terms) {
  const double h =
      cond_entropy(ls.model, ls.y_layer(k, k), ls.y_upto(k - 1, k).united(ls.u_upto(k)));
  const double value = h / k;
  if (terms) terms->push_back({term_name("h(Y" + std::to_string(k) + ",1..k|past)", k), value});
  return value;
}

// Per-layer repair bracket (unclamped):
// h(Y_{k,n} | U_{<=k}, Y_{k,1..n-1}, Y_{<=k-1,<=n}) - (1/n) h(Y_{k,1..n} | X, Y_{<=k-1,<=n}, U_{<=k})
double repair_bracket(const LayerSets& ls, int k) {
  const VariableSet ykn{y_label(k, ls.n)};
  const VariableSet side =
      ls.u_upto(k).united(ls.y_layer(k, ls.n - 1)).united(ls.y_upto(k - 1, ls.n));
  const double lead = cond_entropy(ls.model, ykn, side);
  const double joint = cond_entropy(
      ls.model, ls.y_layer(k, ls.n),
      LayerSets::with_x(ls.y_upto(k - 1, ls.n).united(ls.u_upto(k))));
  return lead - joint / ls.n;
}

// Top-codeword information rate, conditioned on everything below:
// h(Ytop | Y_{<=kmax, <=m_cond}, U_{<=kmax}) - h(Ytop | X, same)
double top_information(const LayerSets& ls, int kmax, int m_cond) {
  const VariableSet top{"Ytop"};
  const VariableSet side = ls.y_upto(kmax, m_cond).united(ls.u_upto(kmax));
  return cond_entropy(ls.model, top, side) -
         cond_entropy(ls.model, top, LayerSets::with_x(side));
}

double clamp_rate(double x) { return (x < 0.0 && x > -kMiClampTol) ? 0.0 : x; }

RatePoint assemble(double r, double r_repair_clamped, double rr_unclamped,
                   RateBreakdown* breakdown, std::vector<RateTerm> r_terms,
                   std::vector<RateTerm> rr_terms) {
  r = clamp_rate(r);
  r_repair_clamped = clamp_rate(r_repair_clamped);
  if (breakdown) {
    breakdown->r_terms = std::move(r_terms);
    breakdown->rr_terms = std::move(rr_terms);
    breakdown->r = r;
    breakdown->r_repair = r_repair_clamped;
    breakdown->r_repair_unclamped = rr_unclamped;
  }
  return RatePoint::make(r, r_repair_clamped);
}

}  // namespace

RatePoint theorem3_rates(const ChannelParams& params, RateBreakdown* breakdown) {
  params.validate();
  const int n = params.n;
  if (n < 3) throw InvalidParams("distributed-repair rates need n >= 3");
  if (params.layer_common_present(n - 1) || params.layer_private_present(n - 1)) {
    throw InvalidParams(
        "layer n-1 must be absent: the top codeword takes its place in the "
        "distributed-repair scheme");
  }
  const CovarianceModel model = CovarianceModel::build(params);
  const LayerSets ls{params, model, n};

  std::vector<RateTerm> r_terms, rr_terms;
  double r = 0.0;
  bool any_private = false;

  for (int k = 1; k <= n - 2; ++k) {
    if (ls.common(k)) r += common_layer_term(ls, k, &r_terms);
    if (ls.priv(k)) {
      any_private = true;
      r += private_layer_term(ls, k, &r_terms);
    }
  }
  if (any_private) {
    const double joint = cond_entropy(model, ls.y_upto(n - 2, n),
                                      LayerSets::with_x(ls.u_upto(n - 2)));
    r -= joint / n;
    r_terms.push_back({term_name("-h(all Y|X,U)", n), -joint / n});
  }
  if (params.top_present()) {
    const double value = top_information(ls, n - 2, n - 1) / (n - 1);
    r += value;
    r_terms.push_back({term_name("[h(Ytop|past) - h(Ytop|X,past)]", n - 1), value});
  }

  double rr_clamped = 0.0;
  double rr_raw = 0.0;
  for (int k = 1; k <= n - 2; ++k) {
    if (!ls.priv(k)) continue;
    const double bracket = repair_bracket(ls, k);
    rr_terms.push_back({term_name("[repair bracket, layer " + std::to_string(k) + "]", n - 1),
                        bracket / (n - 1)});
    rr_raw += bracket / (n - 1);
    rr_clamped += std::max(0.0, bracket) / (n - 1);
  }

  return assemble(r, rr_clamped, rr_raw, breakdown, std::move(r_terms), std::move(rr_terms));
}

RatePoint theorem4_rates(const ChannelParams& params, RateBreakdown* breakdown) {
  params.validate();
  const int n = params.n;
  const CovarianceModel model = CovarianceModel::build(params);
  const LayerSets ls{params, model, n};

  std::vector<RateTerm> r_terms, rr_terms;
  double r = 0.0;
  bool any_private = false;

  for (int k = 1; k <= n - 1; ++k) {
    if (ls.common(k)) r += common_layer_term(ls, k, &r_terms);
    if (ls.priv(k)) {
      any_private = true;
      r += private_layer_term(ls, k, &r_terms);
    }
  }
  if (any_private) {
    const double joint = cond_entropy(model, ls.y_upto(n - 1, n),
                                      LayerSets::with_x(ls.u_upto(n - 1)));
    r -= joint / n;
    r_terms.push_back({term_name("-h(all Y|X,U)", n), -joint / n});
  }

  double top_term = 0.0;
  if (params.top_present()) {
    top_term = top_information(ls, n - 1, n) / n;
    r += top_term;
    r_terms.push_back({term_name("[h(Ytop|past) - h(Ytop|X,past)]", n), top_term});
  }

  double rr_clamped = 0.0;
  double rr_raw = 0.0;
  for (int k = 1; k <= n - 1; ++k) {
    if (!ls.priv(k)) continue;
    const double bracket = repair_bracket(ls, k);
    rr_terms.push_back({"[repair bracket, layer " + std::to_string(k) + "]", bracket});
    rr_raw += bracket;
    rr_clamped += std::max(0.0, bracket);
  }
  if (params.top_present()) {
    rr_terms.push_back({term_name("[h(Ytop|past) - h(Ytop|X,past)]", n), top_term});
    rr_raw += top_term;
    rr_clamped += top_term;
  }

  return assemble(r, rr_clamped, rr_raw, breakdown, std::move(r_terms), std::move(rr_terms));
}

double prop1_rate(const ChannelParams& params, RateBreakdown* breakdown) {
  params.validate();
  const int n = params.n;
  if (n < 3) throw InvalidParams("no-repair baseline needs n >= 3");
  for (int k = 1; k <= n - 1; ++k) {
    if (params.layer_common_present(k)) {
      throw InvalidParams("no-repair baseline carries no common codewords");
    }
  }
  if (params.layer_private_present(n - 1)) {
    throw InvalidParams("layer n-1 must be absent: the top codeword takes its place");
  }
  const CovarianceModel model = CovarianceModel::build(params);
  const LayerSets ls{params, model, n};

  std::vector<RateTerm> r_terms;
  double r = 0.0;
  bool any_private = false;
  for (int k = 1; k <= n - 2; ++k) {
    if (!ls.priv(k)) continue;
    any_private = true;
    r += private_layer_term(ls, k, &r_terms);
  }
  if (any_private) {
    const double joint = cond_entropy(model, ls.y_upto(n - 2, n), VariableSet{"X"});
    r -= joint / n;
    r_terms.push_back({term_name("-h(all Y|X)", n), -joint / n});
  }
  if (params.top_present()) {
    const double value = top_information(ls, n - 2, n - 1) / (n - 1);
    r += value;
    r_terms.push_back({term_name("[h(Ytop|past) - h(Ytop|X,past)]", n - 1), value});
  }
  r = clamp_rate(r);
  if (breakdown) {
    breakdown->r_terms = std::move(r_terms);
    breakdown->rr_terms.clear();
    breakdown->r = r;
    breakdown->r_repair = 0.0;
    breakdown->r_repair_unclamped = 0.0;
  }
  return r;
}

}  // namespace mdr
