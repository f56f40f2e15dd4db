#include "mdr/covariance.hpp"

#include "doctest.h"
#include "mdr/errors.hpp"

using namespace mdr;

namespace {

ChannelParams two_node(double u, double s, double rho, double top = kAbsent) {
  ChannelParams p = ChannelParams::all_absent(2);
  p.layers[0] = {u, s, rho};
  p.top_sigma_sq = top;
  return p;
}

}  // namespace

TEST_SUITE("covariance") {

TEST_CASE("uncorrelated two-node model has unit cross-covariance") {
  const CovarianceModel m = CovarianceModel::build(two_node(1.0, 1.0, 0.0));
  CHECK(m.dim() == 4);  // X, U1, Y1_1, Y1_2
  CHECK(m.matrix()(m.index_of("Y1_1"), m.index_of("Y1_2")) == doctest::Approx(1.0));
  CHECK(m.matrix()(m.index_of("Y1_1"), m.index_of("Y1_1")) == doctest::Approx(2.0));
  CHECK(m.matrix()(m.index_of("X"), m.index_of("X")) == doctest::Approx(1.0));
  CHECK(m.matrix()(m.index_of("X"), m.index_of("U1")) == doctest::Approx(1.0));
}

TEST_CASE("perfectly correlated noises give identical descriptions") {
  const double s = 0.7;
  const CovarianceModel m = CovarianceModel::build(two_node(kAbsent, s, 1.0));
  CHECK(m.matrix()(m.index_of("Y1_1"), m.index_of("Y1_2")) == doctest::Approx(1.0 + s));
}

TEST_CASE("three-node correlation just above -1/2 passes the PSD check") {
  ChannelParams p = ChannelParams::all_absent(3);
  p.layers[0] = {kAbsent, 0.5, -0.4};
  CHECK_NOTHROW(CovarianceModel::build(p));
  // Correlation matrix eigenvalues are 1 + 2 rho = 0.2 and 1 - rho = 1.4.
  p.layers[0].rho = -0.55;
  CHECK_THROWS_AS(CovarianceModel::build(p), InvalidParams);
}

TEST_CASE("absent variances are omitted from the model") {
  const CovarianceModel m = CovarianceModel::build(two_node(kAbsent, 1.0, 0.0));
  CHECK(m.dim() == 3);
  CHECK(!m.has("U1"));
  CHECK(m.has("Y1_2"));

  const CovarianceModel only_top = CovarianceModel::build(two_node(kAbsent, kAbsent, 0.0, 2.0));
  CHECK(only_top.dim() == 2);
  CHECK(only_top.has("Ytop"));
}

TEST_CASE("variable sets reject duplicates") {
  CHECK_THROWS_AS(VariableSet({"X", "X"}), InvalidParams);
  VariableSet s{"X"};
  CHECK_THROWS_AS(s.add("X"), InvalidParams);
  CHECK(s.united(VariableSet{"X", "U1"}).size() == 2);
}

TEST_CASE("model matrix is invariant under node relabeling within a layer") {
  ChannelParams p = ChannelParams::all_absent(3);
  p.layers[0] = {0.8, 0.5, 0.3};
  p.top_sigma_sq = 1.5;
  const CovarianceModel m = CovarianceModel::build(p);
  // Swapping node roles permutes rows/columns without changing entries.
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      if (i == j) continue;
      CHECK(m.matrix()(m.index_of(y_label(1, i)), m.index_of(y_label(1, j))) ==
            m.matrix()(m.index_of(y_label(1, 1)), m.index_of(y_label(1, 2))));
      CHECK(m.matrix()(m.index_of(y_label(1, i)), m.index_of(y_label(1, i))) ==
            m.matrix()(m.index_of(y_label(1, 1)), m.index_of(y_label(1, 1))));
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  ChannelParams p = ChannelParams::all_absent(2);
  p.layers[0].sigma_q_sq = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = ChannelParams::all_absent(1);
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = ChannelParams::all_absent(3);
  p.layers.pop_back();
  CHECK_THROWS_AS(p.validate(), InvalidParams);
}

TEST_CASE("channel params JSON round-trip") {
  ChannelParams p = ChannelParams::all_absent(3);
  p.layers[0] = {0.6, 1.5, 0.0};
  p.top_sigma_sq = kAbsent;
  const std::string text = channel_params_to_json(p);
  const ChannelParams back = channel_params_from_json(text);
  CHECK(back.n == 3);
  CHECK(back.layers[0].sigma_u_sq == doctest::Approx(0.6));
  CHECK(back.layers[0].sigma_q_sq == doctest::Approx(1.5));
  CHECK(is_absent(back.layers[1].sigma_q_sq));
  CHECK(is_absent(back.top_sigma_sq));

  CHECK_THROWS_AS(channel_params_from_json("{not json"), InvalidParams);
  CHECK_THROWS_AS(channel_params_from_json(R"({"n": 2, "layers": [{"sigma_u_sq": "huge"}]})"),
                  InvalidParams);
}

}  // TEST_SUITE
