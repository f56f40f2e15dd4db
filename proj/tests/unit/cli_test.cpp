// End-to-end checks of the command-line surface: every subcommand is a thin
// wrapper whose emitted numbers equal the library outputs.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mdr/closed_form.hpp"
#include "mdr/region_explorer.hpp"
#include "mdr/repair_sim.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MDR_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp_path(const std::string& name) {
  return std::string(MDR_TEST_TMPDIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("two-node: json output equals the library call") {
  const RunResult r = run_cli("two-node --d1 0.3 --d2 0.25 --format json");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  const mdr::RatePoint p = mdr::two_node_optimal({0.3, 0.25});
  CHECK(j.at("r").get<double>() == p.r);
  CHECK(j.at("r_repair").get<double>() == p.r_repair);
  CHECK(j.at("r_total").get<double>() == p.r_total);
  CHECK(j.at("regime").get<std::string>() == "common-message");
  CHECK(j.at("params").at("layers")[0].at("sigma_u_sq").get<double>() == doctest::Approx(0.6));
}

TEST_CASE("two-node: equal targets need no repair rate") {
  const RunResult r = run_cli("two-node --d1 0.3 --d2 0.3 --format json");
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(r.output).at("r_repair").get<double>() == 0.0);
}

TEST_CASE("two-node: usage errors exit 2") {
  CHECK(run_cli("two-node --d1 0.3 --d2 0.4").exit_code == 2);
  CHECK(run_cli("two-node --d1 0.3").exit_code == 2);
  CHECK(run_cli("two-node --d1 1.3 --d2 0.2").exit_code == 2);
  CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("three-node: matches the library optimum bit for bit") {
  const RunResult r = run_cli("three-node --d1 0.3 --d2 0.15 --format json");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  const mdr::RatePoint p = mdr::three_node_optimal({0.3, 0.15});
  CHECK(j.at("best").at("r_total").get<double>() == p.r_total);
  CHECK(j.at("best").at("regime").get<std::string>() == mdr::regime_name(*p.regime));
  CHECK(j.at("regimes").contains("resolution-info"));

  const RunResult equal = run_cli("three-node --d1 0.3 --d2 0.3 --format json");
  REQUIRE(equal.exit_code == 0);
  CHECK(nlohmann::json::parse(equal.output).at("best").at("r_repair").get<double>() < 1e-3);
}

TEST_CASE("sweep: header, row count, and byte-identical reruns") {
  const std::string path = tmp_path("sweep_test.csv");
  const std::string args = "sweep --d1 0.3 --d2-min 0.1 --d2-max 0.3 --steps 5 --out " + path;
  REQUIRE(run_cli(args).exit_code == 0);
  const std::string first = slurp(path);
  CHECK(first.find("d2,ec2,prp3,modified_prp3,repair3_nocommon,repair3_common,twonode_total\n") !=
        std::string::npos);
  int rows = 0;
  std::stringstream ss(first);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line[0] != '#' && line[0] != 'd') ++rows;
  }
  CHECK(rows == 5);
  REQUIRE(run_cli(args).exit_code == 0);
  CHECK(slurp(path) == first);

  CHECK(run_cli("sweep --d1 0.3 --d2-min 0.1 --d2-max 0.3 --steps 5 --out /nonexistent/x.csv")
            .exit_code == 1);
  CHECK(run_cli("sweep --d1 0.3 --d2-min 0.1 --d2-max 0.5 --steps 5 --out " + path).exit_code ==
        2);
}

TEST_CASE("simulate: exact repair, determinism, node-count validation") {
  const std::string path = tmp_path("sim_test.json");
  const std::string args =
      "simulate --nodes 2 --d1 0.3 --d2 0.25 --samples 2000 --trials 3 --seed 7 --out " + path;
  REQUIRE(run_cli(args).exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(path));
  CHECK(j.at("repair_exact_rate").get<double>() == 1.0);
  CHECK(j.at("trials").get<int>() == 3);
  CHECK(j.at("seed").get<uint64_t>() == 7);
  CHECK(j.at("empirical_d").contains("1"));
  const std::string first = slurp(path);
  REQUIRE(run_cli(args).exit_code == 0);
  CHECK(slurp(path) == first);

  CHECK(run_cli("simulate --nodes 1 --d1 0.3 --d2 0.25 --samples 100 --trials 1 --seed 1")
            .exit_code == 2);
  // Infeasible desk-scale channel: domain failure, not usage.
  CHECK(run_cli("simulate --nodes 2 --d1 0.3 --d2 0.15 --samples 1000 --trials 1 --seed 1")
            .exit_code == 1);
}

TEST_CASE("entropy: evaluates a config file and audits the terms") {
  const std::string path = tmp_path("params_test.json");
  {
    const mdr::RatePoint p = mdr::two_node_optimal({0.3, 0.25});
    std::ofstream f(path);
    f << mdr::channel_params_to_json(*p.params);
  }
  const RunResult r = run_cli("entropy --config " + path + " --expr thm4");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j.at("r_repair").get<double>() ==
        doctest::Approx(0.5 * std::log2(0.3 / 0.25)).epsilon(1e-9));
  CHECK(j.at("r_terms").size() > 0);

  // Only a top codeword: the rate reduces to a single audited term.
  {
    std::ofstream f(path);
    f << R"({"n": 2, "layers": [{"sigma_u_sq": "inf", "sigma_q_sq": "inf", "rho": 0}],
             "top_sigma_sq": 1.0})";
  }
  const RunResult top_only = run_cli("entropy --config " + path + " --expr thm4");
  REQUIRE(top_only.exit_code == 0);
  const auto jt = nlohmann::json::parse(top_only.output);
  CHECK(jt.at("r_terms").size() == 1);
  CHECK(jt.at("r").get<double>() == doctest::Approx(0.25 * std::log2(2.0)).epsilon(1e-9));

  {
    std::ofstream f(path);
    f << "{broken";
  }
  CHECK(run_cli("entropy --config " + path + " --expr thm4").exit_code == 2);

  {
    std::ofstream f(path);
    f << R"({"n": 3, "layers": [{"sigma_q_sq": 1.0, "rho": -0.9},
             {"sigma_q_sq": "inf", "sigma_u_sq": "inf", "rho": 0}],
             "top_sigma_sq": "inf"})";
  }
  const RunResult bad = run_cli("entropy --config " + path + " --expr thm3");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("eigenvalue") != std::string::npos);

  CHECK(run_cli("entropy --config /nonexistent.json --expr thm4").exit_code == 2);
}

TEST_CASE("oracle: small grid reproduces the closed form") {
  const RunResult r = run_cli(
      "oracle --nodes 2 --d1 0.3 --d2 0.25 --rho-points 120 --var-points 24 --q2-points 4 "
      "--format json");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j.at("abs_diff").get<double>() < 5e-3);
  CHECK(run_cli("oracle --nodes 4 --d1 0.3 --d2 0.25").exit_code == 2);
}
