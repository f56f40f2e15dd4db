#include "mdr/region_explorer.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "mdr/entropy_engine.hpp"
#include "mdr/errors.hpp"

using namespace mdr;

namespace {

OracleGrid small_grid() {
  OracleGrid g;
  g.rho_points = 160;
  g.var_points = 32;
  g.q_points = 6;
  return g;
}

}  // namespace

TEST_SUITE("region_explorer") {

TEST_CASE("equal distortions: identical copies, zero repair") {
  const double d1 = 0.3;
  const RatePoint p = three_node_optimal({d1, d1});
  CHECK(p.r_repair < 1e-6);
  CHECK(p.r_total == doctest::Approx(0.5 * std::log2(1.0 / d1)).epsilon(1e-4));
}

TEST_CASE("common message never hurts") {
  for (const double d2 : {0.15, 0.2, 0.25, 0.29}) {
    const DistortionSpec spec{0.3, d2};
    CHECK(three_node_optimal(spec).r_total <=
          three_node_optimal_no_common(spec).r_total + 1e-9);
  }
}

TEST_CASE("optimal total stays above the no-repair floor at its own parameters") {
  for (const double d2 : {0.12, 0.2, 0.28}) {
    const RatePoint p = three_node_optimal({0.3, d2});
    REQUIRE(p.params.has_value());
    ChannelParams stripped = *p.params;
    stripped.layers[0].sigma_u_sq = kAbsent;
    if (!stripped.layer_private_present(1)) continue;  // pure-common optimum
    CHECK(p.r_total >= prop1_rate(stripped) - 1e-9);
  }
}

TEST_CASE("oracle reproduces the two-node optimum in all three regimes") {
  const OracleGrid g = small_grid();
  for (const auto& spec : {DistortionSpec{0.3, 0.25}, DistortionSpec{0.3, 0.15},
                           DistortionSpec{0.7, 0.3}}) {
    const RatePoint oracle = brute_force_oracle(spec, 2, g);
    const RatePoint exact = two_node_optimal(spec);
    CHECK(exact.r_total >= oracle.r_total - 5e-3);
    CHECK(exact.r_total <= oracle.r_total + 1e-9);
  }
}

TEST_CASE("oracle equal-rate symmetry in the resolution regime") {
  const RatePoint oracle = brute_force_oracle({0.7, 0.3}, 2, small_grid());
  CHECK(std::abs(oracle.r - oracle.r_repair) < 5e-3);
}

TEST_CASE("three-node oracle matches the regime-wise optimizer") {
  const RatePoint oracle = brute_force_oracle({0.3, 0.15}, 3, small_grid());
  const RatePoint opt = three_node_optimal({0.3, 0.15});
  CHECK(std::abs(oracle.r_total - opt.r_total) < 5e-3);
}

TEST_CASE("oracle sandwich across random specs") {
  std::mt19937_64 rng(246);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const OracleGrid g = small_grid();
  for (int i = 0; i < 10; ++i) {
    const double d1 = 0.1 + 0.8 * u01(rng);
    const double d2 = d1 * (0.3 + 0.7 * u01(rng));
    const DistortionSpec spec{d1, d2};
    const RatePoint oracle = brute_force_oracle(spec, 2, g);
    const RatePoint exact = two_node_optimal(spec);
    CHECK(exact.r_total >= oracle.r_total - 5e-3);
    CHECK(exact.r_total <= oracle.r_total + 1e-9);
  }
}

TEST_CASE("oracle rejects oversized grids and infeasible setups") {
  OracleGrid g;
  g.rho_points = 10000;
  g.var_points = 1000;
  g.q_points = 1000;
  CHECK_THROWS_AS(brute_force_oracle({0.3, 0.2}, 2, g), InvalidParams);
  CHECK_THROWS_AS(brute_force_oracle({0.3, 0.2}, 5, small_grid()), InvalidParams);
}

TEST_CASE("sweep rows honor the documented curve orderings") {
  std::vector<double> d2s;
  for (int i = 0; i < 10; ++i) d2s.push_back(0.04 + (0.3 - 0.04) * i / 9.0);
  const SweepResult sr = sweep(0.3, d2s);
  REQUIRE(sr.rows.size() == d2s.size());
  double prev_total = std::numeric_limits<double>::infinity();
  for (const SweepRow& row : sr.rows) {
    CHECK(row.modified_prp3 <= row.prp3 + 1e-9);
    CHECK(row.ec2 <= row.modified_prp3 + 1e-9);
    CHECK(row.repair3_common <= row.repair3_nocommon + 1e-9);
    CHECK(row.repair3_common <= prev_total + 1e-6);
    prev_total = row.repair3_common;
    CHECK(row.twonode_total == doctest::Approx(0.5 * std::log2(1.0 / row.d2)).epsilon(1e-12));
  }
  // Equal distortions: repair costs nothing beyond the no-repair baseline.
  const SweepResult edge = sweep(0.3, {0.3});
  CHECK(edge.rows[0].repair3_common ==
        doctest::Approx(edge.rows[0].modified_prp3).epsilon(1e-3));
}

TEST_CASE("sweep output is deterministic and well-formed") {
  std::vector<double> d2s{0.1, 0.2, 0.3};
  const std::string a = sweep(0.3, d2s).to_csv();
  const std::string b = sweep(0.3, d2s).to_csv();
  CHECK(a == b);
  CHECK(a.find("d2,ec2,prp3,modified_prp3,repair3_nocommon,repair3_common,twonode_total\n") !=
        std::string::npos);
  CHECK(a.rfind("#", 0) == 0);

  CHECK_THROWS_AS(sweep(0.3, {0.4}), InvalidParams);  // d2 > d1
}

}  // TEST_SUITE
