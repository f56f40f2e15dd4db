#include "mdr/covariance.hpp"

#include <algorithm>

#include "mdr/errors.hpp"

namespace mdr {

VariableSet::VariableSet(std::initializer_list<std::string> labels) {
  for (const auto& l : labels) add(l);
}

VariableSet::VariableSet(std::vector<std::string> labels) {
  for (auto& l : labels) add(std::move(l));
}

void VariableSet::add(std::string label) {
  if (contains(label)) throw InvalidParams("duplicate label in variable set: " + label);
  labels_.push_back(std::move(label));
}

bool VariableSet::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

VariableSet VariableSet::united(const VariableSet& other) const {
  VariableSet out = *this;
  for (const auto& l : other.labels_) {
    if (!out.contains(l)) out.add(l);
  }
  return out;
}

std::string u_label(int k) { return "U" + std::to_string(k); }

std::string y_label(int k, int node) {
  return "Y" + std::to_string(k) + "_" + std::to_string(node);
}

CovarianceModel CovarianceModel::build(const ChannelParams& params) {
  params.validate();
  const int n = params.n;

  CovarianceModel model;
  model.labels_.push_back("X");

  // noise_var[v] and, for private codewords, (layer, rho) bookkeeping.
  struct PrivateInfo {
    int layer;
    double rho;
    double var;
  };
  std::vector<double> common_var;           // aligned with labels_ for U's
  std::vector<PrivateInfo> private_info;    // aligned with private labels
  std::unordered_map<std::string, double> var_of;
  std::unordered_map<std::string, PrivateInfo> priv_of;

  for (int k = 1; k <= n - 1; ++k) {
    const LayerParams& layer = params.layers[k - 1];
    if (!is_absent(layer.sigma_u_sq)) {
      model.labels_.push_back(u_label(k));
      var_of[u_label(k)] = layer.sigma_u_sq;
    }
    if (!is_absent(layer.sigma_q_sq)) {
      for (int i = 1; i <= n; ++i) {
        model.labels_.push_back(y_label(k, i));
        priv_of[y_label(k, i)] = PrivateInfo{k, layer.rho, layer.sigma_q_sq};
      }
    }
  }
  if (!is_absent(params.top_sigma_sq)) {
    model.labels_.push_back("Ytop");
    var_of["Ytop"] = params.top_sigma_sq;
  }

  const int d = static_cast<int>(model.labels_.size());
  model.matrix_ = Eigen::MatrixXd::Ones(d, d);
  for (int a = 1; a < d; ++a) {
    const std::string& la = model.labels_[a];
    for (int b = 1; b < d; ++b) {
      if (a == b) {
        double noise = var_of.count(la) ? var_of[la] : priv_of[la].var;
        model.matrix_(a, b) = 1.0 + noise;
      } else {
        auto ia = priv_of.find(la);
        auto ib = priv_of.find(model.labels_[b]);
        // Same private layer: shared intra-layer correlation. Every other
        // pairing has uncorrelated noises and keeps the base covariance 1.
        if (ia != priv_of.end() && ib != priv_of.end() && ia->second.layer == ib->second.layer) {
          model.matrix_(a, b) = 1.0 + ia->second.rho * ia->second.var;
        }
      }
    }
  }

  for (int i = 0; i < d; ++i) model.index_[model.labels_[i]] = i;

  // Spec invariant: symmetric PSD within tolerance, unit source variance.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidParams("covariance model not PSD, min eigenvalue " +
                        std::to_string(es.eigenvalues().minCoeff()));
  }
  return model;
}

bool CovarianceModel::has(std::string_view label) const {
  return index_.find(std::string(label)) != index_.end();
}

int CovarianceModel::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) throw InvalidParams("no such variable in model: " + std::string(label));
  return it->second;
}

std::vector<int> CovarianceModel::indices(const VariableSet& vars) const {
  std::vector<int> out;
  out.reserve(vars.size());
  for (const auto& l : vars.labels()) out.push_back(index_of(l));
  return out;
}

Eigen::MatrixXd CovarianceModel::block(const std::vector<int>& rows,
                                       const std::vector<int>& cols) const {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) out(r, c) = matrix_(rows[r], cols[c]);
  }
  return out;
}

}  // namespace mdr
