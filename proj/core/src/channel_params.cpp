#include "mdr/channel_params.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "mdr/errors.hpp"

namespace mdr {

void ChannelParams::validate() const {
  if (n < 2) throw InvalidParams("node count must be >= 2, got " + std::to_string(n));
  if (static_cast<int>(layers.size()) != n - 1) {
    throw InvalidParams("expected " + std::to_string(n - 1) + " layers for n=" +
                        std::to_string(n) + ", got " + std::to_string(layers.size()));
  }
  auto check_var = [](double v, const std::string& name) {
    if (std::isnan(v) || v <= 0.0) {
      throw InvalidParams(name + " must be positive or infinite (absent), got " +
                          std::to_string(v));
    }
  };
  for (int k = 1; k <= n - 1; ++k) {
    const LayerParams& layer = layers[k - 1];
    check_var(layer.sigma_u_sq, "layer " + std::to_string(k) + " sigma_u_sq");
    check_var(layer.sigma_q_sq, "layer " + std::to_string(k) + " sigma_q_sq");
    if (!is_absent(layer.sigma_q_sq)) {
      // The n x n noise correlation matrix (1 on the diagonal, rho off it)
      // has eigenvalues 1 + (n-1) rho and 1 - rho, so PSD with a nonsingular
      // per-node noise needs rho in (-1/(n-1), 1].
      const double rho = layer.rho;
      const double lo = -1.0 / (n - 1);
      if (!(rho > lo - 1e-10 && rho <= 1.0 + 1e-12) || std::isnan(rho)) {
        std::ostringstream os;
        os << "layer " << k << " rho=" << rho << " outside (" << lo
           << ", 1]; correlation matrix eigenvalues " << 1.0 + (n - 1) * rho << " and "
           << 1.0 - rho << " not PSD";
        throw InvalidParams(os.str());
      }
    }
  }
  check_var(top_sigma_sq, "top_sigma_sq");
}

ChannelParams ChannelParams::all_absent(int n) {
  ChannelParams p;
  p.n = n;
  p.layers.assign(static_cast<size_t>(n - 1), LayerParams{});
  p.top_sigma_sq = kAbsent;
  return p;
}

namespace {

double variance_from_json(const nlohmann::json& j, const std::string& name) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kAbsent;
    throw InvalidParams(name + ": only the string \"inf\" is accepted, got \"" +
                        j.get<std::string>() + "\"");
  }
  if (!j.is_number()) throw InvalidParams(name + ": expected number or \"inf\"");
  return j.get<double>();
}

nlohmann::json variance_to_json(double v) {
  if (is_absent(v)) return "inf";
  return v;
}

}  // namespace

ChannelParams channel_params_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParams(std::string("malformed channel-params JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("layers")) {
    throw InvalidParams("channel-params JSON must be an object with \"n\" and \"layers\"");
  }
  ChannelParams p;
  p.n = doc.at("n").get<int>();
  if (!doc.at("layers").is_array()) throw InvalidParams("\"layers\" must be an array");
  int k = 0;
  for (const auto& jl : doc.at("layers")) {
    ++k;
    LayerParams layer;
    const std::string label = "layer " + std::to_string(k);
    if (jl.contains("sigma_u_sq")) layer.sigma_u_sq = variance_from_json(jl.at("sigma_u_sq"), label + " sigma_u_sq");
    if (jl.contains("sigma_q_sq")) layer.sigma_q_sq = variance_from_json(jl.at("sigma_q_sq"), label + " sigma_q_sq");
    if (jl.contains("rho")) layer.rho = jl.at("rho").get<double>();
    p.layers.push_back(layer);
  }
  if (doc.contains("top_sigma_sq")) {
    p.top_sigma_sq = variance_from_json(doc.at("top_sigma_sq"), "top_sigma_sq");
  }
  p.validate();
  return p;
}

std::string channel_params_to_json(const ChannelParams& params, int indent) {
  nlohmann::json doc;
  doc["n"] = params.n;
  doc["layers"] = nlohmann::json::array();
  for (const auto& layer : params.layers) {
    doc["layers"].push_back({{"sigma_u_sq", variance_to_json(layer.sigma_u_sq)},
                             {"sigma_q_sq", variance_to_json(layer.sigma_q_sq)},
                             {"rho", layer.rho}});
  }
  doc["top_sigma_sq"] = variance_to_json(params.top_sigma_sq);
  return doc.dump(indent);
}

}  // namespace mdr
