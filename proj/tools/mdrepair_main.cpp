// mdrepair: rate/repair-rate region computations for multiple descriptions
// on distributed storage, plus a desk-scale repair simulator.
//
// Exit codes: 0 success, 1 domain/runtime failure, 2 usage error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdr/closed_form.hpp"
#include "mdr/entropy_engine.hpp"
#include "mdr/errors.hpp"
#include "mdr/region_explorer.hpp"
#include "mdr/repair_sim.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open output path " << out_path << "\n";
    return kRuntimeError;
  }
  f << text;
  return f.good() ? kOk : kRuntimeError;
}

json params_to_json_obj(const mdr::ChannelParams& p) {
  return json::parse(mdr::channel_params_to_json(p));
}

json rate_point_json(const mdr::RatePoint& p) {
  json j;
  j["r"] = p.r;
  j["r_repair"] = p.r_repair;
  j["r_total"] = p.r_total;
  if (p.regime) j["regime"] = mdr::regime_name(*p.regime);
  if (p.params) j["params"] = params_to_json_obj(*p.params);
  return j;
}

std::string rate_point_text(const mdr::RatePoint& p) {
  std::ostringstream os;
  if (p.regime) os << "regime:   " << mdr::regime_name(*p.regime) << "\n";
  os << "r:        " << fmt9(p.r) << "\n";
  os << "r_repair: " << fmt9(p.r_repair) << "\n";
  os << "r_total:  " << fmt9(p.r_total) << "\n";
  if (p.params) os << "params:   " << mdr::channel_params_to_json(*p.params) << "\n";
  return os.str();
}

std::string rate_point_csv(const mdr::RatePoint& p) {
  std::ostringstream os;
  os << "regime,r,r_repair,r_total\n";
  os << (p.regime ? mdr::regime_name(*p.regime) : "-") << "," << fmt9(p.r) << ","
     << fmt9(p.r_repair) << "," << fmt9(p.r_total) << "\n";
  return os.str();
}

struct DistortionFlags {
  double d1 = 0.0;
  double d2 = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--d1", d1, "one-node distortion target in (0,1)")->required();
    cmd->add_option("--d2", d2, "pair distortion target in (0, d1]")->required();
  }
  // Usage-level validation: bad ranges are a flag error, not a runtime one.
  bool valid() const { return d1 > 0.0 && d1 < 1.0 && d2 > 0.0 && d2 <= d1; }
  mdr::DistortionSpec spec() const { return {d1, d2}; }
};

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\nsee 'mdrepair --help'\n";
  return kUsageError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Rate/repair-rate regions for multiple descriptions on distributed storage,\n"
      "with a quantize-store-fail-repair simulator."};
  app.require_subcommand(1);

  // two-node ----------------------------------------------------------------
  auto* two = app.add_subcommand("two-node", "optimal two-node rates and parameters");
  DistortionFlags two_d;
  two_d.attach(two);
  std::string two_format = "text";
  std::string two_out;
  two->add_option("--format", two_format)->check(CLI::IsMember({"text", "json", "csv"}));
  two->add_option("--out", two_out, "write to file instead of stdout");

  // three-node ---------------------------------------------------------------
  auto* three = app.add_subcommand("three-node", "three-node distributed-repair optimum");
  DistortionFlags three_d;
  three_d.attach(three);
  int three_grid = 512;
  std::string three_format = "text";
  std::string three_out;
  three->add_option("--grid", three_grid, "scan points per regime")->check(CLI::Range(8, 100000));
  three->add_option("--format", three_format)->check(CLI::IsMember({"text", "json", "csv"}));
  three->add_option("--out", three_out);

  // sweep ---------------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "six-curve rate sweep over d2 at fixed d1 (CSV)");
  double sw_d1 = 0.3, sw_d2_min = 0.02, sw_d2_max = 0.3;
  int sw_steps = 64;
  std::string sw_out;
  sw->add_option("--d1", sw_d1)->required();
  sw->add_option("--d2-min", sw_d2_min)->required();
  sw->add_option("--d2-max", sw_d2_max)->required();
  sw->add_option("--steps", sw_steps)->required()->check(CLI::Range(1, 100000));
  sw->add_option("--out", sw_out, "output CSV path")->required();

  // oracle ----------------------------------------------------------------------
  auto* orc = app.add_subcommand("oracle", "brute-force grid oracle vs the closed forms");
  DistortionFlags orc_d;
  orc_d.attach(orc);
  int orc_nodes = 2, orc_rho = 200, orc_var = 48, orc_q = 8;
  std::string orc_format = "text";
  std::string orc_out;
  orc->add_option("--nodes", orc_nodes)->required();
  orc->add_option("--rho-points", orc_rho)->check(CLI::Range(8, 100000));
  orc->add_option("--var-points", orc_var)->check(CLI::Range(4, 100000));
  orc->add_option("--q2-points", orc_q)->check(CLI::Range(1, 100000));
  orc->add_option("--format", orc_format)->check(CLI::IsMember({"text", "json"}));
  orc->add_option("--out", orc_out);

  // simulate ----------------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "store, fail and repair a quantized source");
  DistortionFlags sim_d;
  sim_d.attach(sim);
  int sim_nodes = 3, sim_samples = 10000, sim_trials = 10;
  uint64_t sim_seed = 1;
  std::string sim_out;
  sim->add_option("--nodes", sim_nodes)->required();
  sim->add_option("--samples", sim_samples, "source samples per block")->required();
  sim->add_option("--trials", sim_trials)->required();
  sim->add_option("--seed", sim_seed)->required();
  sim->add_option("--out", sim_out, "write the report JSON to a file");

  // entropy ---------------------------------------------------------------------
  auto* ent = app.add_subcommand("entropy", "evaluate a rate expression for a channel JSON");
  std::string ent_config, ent_expr, ent_out;
  ent->add_option("--config", ent_config, "channel-parameters JSON file")->required();
  ent->add_option("--expr", ent_expr)->required()->check(CLI::IsMember({"thm3", "thm4", "prop1"}));
  ent->add_option("--out", ent_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (two->parsed()) {
      if (!two_d.valid()) return usage_error("need 0 < d2 <= d1 < 1");
      const mdr::RatePoint p = mdr::two_node_optimal(two_d.spec());
      std::string text;
      if (two_format == "json") {
        json j = rate_point_json(p);
        j["d1"] = two_d.d1;
        j["d2"] = two_d.d2;
        text = j.dump(2) + "\n";
      } else if (two_format == "csv") {
        text = rate_point_csv(p);
      } else {
        text = rate_point_text(p);
      }
      return emit(text, two_out);
    }

    if (three->parsed()) {
      if (!three_d.valid()) return usage_error("need 0 < d2 <= d1 < 1");
      mdr::OptimizerConfig cfg;
      cfg.grid_points = three_grid;
      const auto optima = mdr::three_node_regime_optima(three_d.spec(), cfg);
      const mdr::RatePoint best = mdr::three_node_optimal(three_d.spec(), cfg);
      if (three_format == "csv") return emit(rate_point_csv(best), three_out);
      if (three_format == "json") {
        json j;
        j["d1"] = three_d.d1;
        j["d2"] = three_d.d2;
        j["best"] = rate_point_json(best);
        json regimes = json::object();
        for (const auto& opt : optima) {
          json r = rate_point_json(opt.point);
          r["rho"] = opt.rho;
          regimes[mdr::regime_name(opt.regime)] = r;
        }
        j["regimes"] = regimes;
        return emit(j.dump(2) + "\n", three_out);
      }
      std::ostringstream os;
      os << "best:\n" << rate_point_text(best);
      for (const auto& opt : optima) {
        os << "\n[" << mdr::regime_name(opt.regime) << "]  rho=" << fmt9(opt.rho) << "\n"
           << rate_point_text(opt.point);
      }
      return emit(os.str(), three_out);
    }

    if (sw->parsed()) {
      if (!(sw_d1 > 0.0 && sw_d1 < 1.0) || !(sw_d2_min > 0.0) || sw_d2_max > sw_d1 ||
          sw_d2_min > sw_d2_max) {
        return usage_error("need 0 < d2-min <= d2-max <= d1 < 1");
      }
      std::vector<double> grid;
      for (int i = 0; i < sw_steps; ++i) {
        grid.push_back(sw_steps == 1 ? sw_d2_min
                                     : sw_d2_min + (sw_d2_max - sw_d2_min) * i / (sw_steps - 1));
      }
      const mdr::SweepResult result = mdr::sweep(sw_d1, grid);
      return emit(result.to_csv(), sw_out);
    }

    if (orc->parsed()) {
      if (!orc_d.valid()) return usage_error("need 0 < d2 <= d1 < 1");
      if (orc_nodes != 2 && orc_nodes != 3) return usage_error("--nodes must be 2 or 3");
      mdr::OracleGrid grid;
      grid.rho_points = orc_rho;
      grid.var_points = orc_var;
      grid.q_points = orc_q;
      const mdr::RatePoint oracle = mdr::brute_force_oracle(orc_d.spec(), orc_nodes, grid);
      const double reference = (orc_nodes == 2)
                                   ? mdr::two_node_optimal(orc_d.spec()).r_total
                                   : mdr::three_node_optimal(orc_d.spec()).r_total;
      if (orc_format == "json") {
        json j;
        j["nodes"] = orc_nodes;
        j["d1"] = orc_d.d1;
        j["d2"] = orc_d.d2;
        j["r"] = oracle.r;
        j["r_repair"] = oracle.r_repair;
        j["r_total"] = oracle.r_total;
        j["closed_form_r_total"] = reference;
        j["abs_diff"] = std::abs(oracle.r_total - reference);
        return emit(j.dump(2) + "\n", orc_out);
      }
      std::ostringstream os;
      os << "oracle r:        " << fmt9(oracle.r) << "\n"
         << "oracle r_repair: " << fmt9(oracle.r_repair) << "\n"
         << "oracle r_total:  " << fmt9(oracle.r_total) << "\n"
         << "closed form:     " << fmt9(reference) << "\n"
         << "abs diff:        " << fmt9(std::abs(oracle.r_total - reference)) << "\n";
      return emit(os.str(), orc_out);
    }

    if (sim->parsed()) {
      if (!sim_d.valid()) return usage_error("need 0 < d2 <= d1 < 1");
      if (sim_nodes != 2 && sim_nodes != 3) return usage_error("--nodes must be 2 or 3");
      if (sim_samples < 1 || sim_trials < 1) return usage_error("--samples and --trials must be >= 1");
      const mdr::SimConfig cfg =
          mdr::make_sim_config(sim_nodes, sim_d.spec(), sim_samples, sim_seed);
      const mdr::SimReport report = mdr::run_experiment(cfg, sim_trials);
      const int rc = emit(report.to_json(2) + "\n", sim_out);
      if (rc != kOk) return rc;
      return report.repair_exact_rate == 1.0 ? kOk : kRuntimeError;
    }

    if (ent->parsed()) {
      std::ifstream f(ent_config, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot read config " << ent_config << "\n";
        return kUsageError;
      }
      std::stringstream buffer;
      buffer << f.rdbuf();
      // Unparseable text is a usage error; semantically invalid parameters
      // (non-PSD correlation, degenerate covariance) are runtime errors.
      try {
        const json probe = json::parse(buffer.str());
        (void)probe;
      } catch (const json::parse_error& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return kUsageError;
      }
      const mdr::ChannelParams params = mdr::channel_params_from_json(buffer.str());
      json j;
      j["expr"] = ent_expr;
      j["n"] = params.n;
      mdr::RateBreakdown breakdown;
      if (ent_expr == "thm3") {
        const mdr::RatePoint p = mdr::theorem3_rates(params, &breakdown);
        j["r"] = p.r;
        j["r_repair"] = p.r_repair;
        j["r_total"] = p.r_total;
      } else if (ent_expr == "thm4") {
        const mdr::RatePoint p = mdr::theorem4_rates(params, &breakdown);
        j["r"] = p.r;
        j["r_repair"] = p.r_repair;
        j["r_total"] = p.r_total;
      } else {
        const double r = mdr::prop1_rate(params, &breakdown);
        j["r"] = r;
        j["r_repair"] = 0.0;
        j["r_total"] = r;
      }
      json terms = json::array();
      for (const auto& t : breakdown.r_terms) terms.push_back({{"name", t.name}, {"value", t.value}});
      j["r_terms"] = terms;
      json rr_terms = json::array();
      for (const auto& t : breakdown.rr_terms) {
        rr_terms.push_back({{"name", t.name}, {"value", t.value}});
      }
      j["rr_terms"] = rr_terms;
      return emit(j.dump(2) + "\n", ent_out);
    }
  } catch (const mdr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
