#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mdr/channel_params.hpp"

namespace mdr {

// A set of variable labels selecting rows of a CovarianceModel. Duplicates
// are rejected; order is irrelevant to every consumer.
class VariableSet {
 public:
  VariableSet() = default;
  VariableSet(std::initializer_list<std::string> labels);
  explicit VariableSet(std::vector<std::string> labels);

  void add(std::string label);
  bool contains(std::string_view label) const;
  bool empty() const { return labels_.size() == 0; }
  size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  VariableSet united(const VariableSet& other) const;

 private:
  std::vector<std::string> labels_;
};

// Joint covariance of (X, U_k, Y_{k,i}, Ytop) for a symmetric Gaussian test
// channel. The source has unit variance, every codeword is X plus a noise
// that is independent of X, so every cross-covariance with X is 1 and the
// noise structure lives in the diagonal blocks.
//
// Labels: "X", "U<k>", "Y<k>_<i>" (layer k, node i, 1-based), "Ytop".
class CovarianceModel {
 public:
  // Builds the model, omitting every variable whose variance is the absent
  // sentinel. Throws InvalidParams when the parameters are invalid.
  static CovarianceModel build(const ChannelParams& params);

  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(labels_.size()); }

  bool has(std::string_view label) const;
  int index_of(std::string_view label) const;  // throws InvalidParams when missing

  // Indices for a label set, in the set's order. Throws when a label is
  // missing or when `vars` references the same row twice.
  std::vector<int> indices(const VariableSet& vars) const;

  // Submatrix / cross blocks for Schur-complement work.
  Eigen::MatrixXd block(const std::vector<int>& rows, const std::vector<int>& cols) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  Eigen::MatrixXd matrix_;
};

// Label helpers shared by the rate evaluators and tests.
std::string u_label(int k);
std::string y_label(int k, int node);

}  // namespace mdr
