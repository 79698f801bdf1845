#pragma once

#include <json.hpp>

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "stagevote/errors.hpp"
#include "stagevote/report.hpp"
#include "stagevote/select.hpp"
#include "stagevote/sim.hpp"

// Simulation configuration documents. Keys follow the simulation header used
// in the published result listings:
//
//   {
//     "numCandiates": 20,            // "numCandidates" is accepted too
//     "numVoters": 500,
//     "numElections": 500,
//     "columnBlindness": 9,          // or an inclusive interval [7, 9]
//     "crowdBuildMethod": {"name": "standardDistribution", "mean": 18000, "standardDeviation": 500},
//     "dataSetName": "mySynthetic",
//     "predictedFeature": "y",
//     "seed": 1
//   }
//
// Optional extensions: numPreferences, dataSetSize, threads, basicAlphas,
// algorithms ([{alpha, beta, gamma, selector, betaMode}]), baselines
// ({fptp, irv, crowdMean, crowdMedian, bestVoter}). "epochs" and
// "trainableLayerCount" are accepted and ignored.

namespace stagevote::sim {

using json = nlohmann::ordered_json;

struct ParsedConfig {
  SimConfig config;
  std::vector<std::string> warnings;
};

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + key + ": missing required key");
  return *it;
}

inline std::size_t as_count(const json& v, const std::string& path, bool allow_zero = false) {
  if (!v.is_number_integer() || v.get<long long>() < (allow_zero ? 0 : 1))
    throw ConfigError(path + ": expected a " + (allow_zero ? "non-negative" : "positive") + " integer");
  return v.get<std::size_t>();
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

// Runs `parse`, prefixing any ConfigError with the key path.
template <class F>
auto at_path(const std::string& path, F parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline SelectionConfig selection_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  SelectionConfig c;
  c.alpha = as_number(require(j, "alpha", path + "."), path + ".alpha");
  if (auto it = j.find("beta"); it != j.end() && !it->is_null()) c.beta = as_number(*it, path + ".beta");
  if (auto it = j.find("gamma"); it != j.end() && !it->is_null()) {
    if (it->is_number())
      c.gamma = GammaRule::any(it->get<double>());
    else if (it->is_string())
      c.gamma = at_path(path + ".gamma", [&] { return GammaRule::parse(it->get<std::string>()); });
    else
      throw ConfigError(path + ".gamma: expected a number or a rule string");
  }
  if (auto it = j.find("selector"); it != j.end()) {
    if (!it->is_string()) throw ConfigError(path + ".selector: expected a string");
    c.selector = at_path(path + ".selector", [&] { return parse_selector(it->get<std::string>()); });
  }
  if (auto it = j.find("betaMode"); it != j.end()) {
    if (!it->is_string()) throw ConfigError(path + ".betaMode: expected a string");
    c.beta_mode = at_path(path + ".betaMode", [&] { return parse_beta_mode(it->get<std::string>()); });
  }
  at_path(path, [&] { c.validate(); });
  return c;
}

}  // namespace detail

inline ParsedConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ParsedConfig out;
  SimConfig& c = out.config;

  const bool has_typo = j.contains("numCandiates");
  const bool has_proper = j.contains("numCandidates");
  if (has_typo && has_proper && j["numCandiates"] != j["numCandidates"])
    throw ConfigError("numCandidates: conflicting values for numCandiates and numCandidates");
  if (!has_typo && !has_proper) throw ConfigError("numCandidates: missing required key");
  c.num_candidates = detail::as_count(has_proper ? j["numCandidates"] : j["numCandiates"], "numCandidates");

  c.num_voters = detail::as_count(detail::require(j, "numVoters", ""), "numVoters");
  c.num_elections = detail::as_count(detail::require(j, "numElections", ""), "numElections");

  const json& blind = detail::require(j, "columnBlindness", "");
  if (blind.is_array()) {
    if (blind.size() != 2) throw ConfigError("columnBlindness: interval must be [lo, hi]");
    c.blindness = {detail::as_count(blind[0], "columnBlindness[0]", true),
                   detail::as_count(blind[1], "columnBlindness[1]", true)};
  } else {
    const auto b = detail::as_count(blind, "columnBlindness", true);
    c.blindness = {b, b};
  }

  const json& crowd = detail::require(j, "crowdBuildMethod", "");
  if (!crowd.is_object()) throw ConfigError("crowdBuildMethod: expected an object");
  if (auto it = crowd.find("name"); it != crowd.end()) {
    if (!it->is_string()) throw ConfigError("crowdBuildMethod.name: expected a string");
    c.quality.name = it->get<std::string>();
    if (c.quality.name != "standardDistribution")
      throw ConfigError("crowdBuildMethod.name: only 'standardDistribution' is supported");
  }
  c.quality.mean = detail::as_number(detail::require(crowd, "mean", "crowdBuildMethod."), "crowdBuildMethod.mean");
  c.quality.sd = detail::as_number(detail::require(crowd, "standardDeviation", "crowdBuildMethod."),
                                   "crowdBuildMethod.standardDeviation");

  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("dataSetName"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("dataSetName: expected a string");
    c.dataset_name = it->get<std::string>();
    if (c.dataset_name != "mySynthetic") throw ConfigError("dataSetName: only 'mySynthetic' is available");
  }
  if (auto it = j.find("predictedFeature"); it != j.end()) {
    if (!it->is_string() || it->get<std::string>() != "y") throw ConfigError("predictedFeature: must be \"y\"");
    c.predicted_feature = "y";
  }
  if (auto it = j.find("epochs"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("epochs: expected an integer");
    c.epochs = it->get<long long>();
    out.warnings.emplace_back("epochs is ignored: voters are calibrated estimators, not trained networks");
  }
  if (auto it = j.find("trainableLayerCount"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("trainableLayerCount: expected an integer");
    c.trainable_layers = it->get<long long>();
    out.warnings.emplace_back("trainableLayerCount is ignored: voters are calibrated estimators, not trained networks");
  }
  if (auto it = j.find("numPreferences"); it != j.end()) c.num_prefs = detail::as_count(*it, "numPreferences");
  if (auto it = j.find("dataSetSize"); it != j.end()) c.dataset.size = detail::as_count(*it, "dataSetSize");
  if (auto it = j.find("threads"); it != j.end()) c.threads = detail::as_count(*it, "threads");
  if (auto it = j.find("basicAlphas"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("basicAlphas: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      c.basic_alphas.push_back(detail::as_number((*it)[i], "basicAlphas[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("algorithms"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("algorithms: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      c.algorithms.push_back(detail::selection_from_json((*it)[i], "algorithms[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("baselines"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("baselines: expected an object");
    for (const auto& [key, value] : it->items()) {
      const std::string path = "baselines." + key;
      if (key == "fptp") c.fptp = detail::as_bool(value, path);
      else if (key == "irv") c.irv = detail::as_bool(value, path);
      else if (key == "crowdMean") c.crowd_mean = detail::as_bool(value, path);
      else if (key == "crowdMedian") c.crowd_median = detail::as_bool(value, path);
      else if (key == "bestVoter") c.best_voter = detail::as_bool(value, path);
      else throw ConfigError(path + ": unknown baseline");
    }
  }

  try {
    with_default_algorithms(c).validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return out;
}

inline ParsedConfig config_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// The header block that precedes a results table.
inline std::string format_header(const SimConfig& c) {
  std::ostringstream out;
  out << "numCandiates : " << c.num_candidates << '\n';
  out << "numVoters : " << c.num_voters << '\n';
  out << "numElections : " << c.num_elections << '\n';
  out << "columnBlindness : ";
  if (c.blindness.lo == c.blindness.hi)
    out << c.blindness.lo << '\n';
  else
    out << '[' << c.blindness.lo << ", " << c.blindness.hi << "]\n";
  if (c.epochs) out << "epochs : " << *c.epochs << '\n';
  if (c.trainable_layers) out << "trainableLayerCount : " << *c.trainable_layers << '\n';
  out << "crowdBuildMethod : {'name': '" << c.quality.name
      << "', 'mean': " << stagevote::detail::format_number(c.quality.mean)
      << ", 'standardDeviation': " << stagevote::detail::format_number(c.quality.sd) << "}\n";
  out << "dataSetName : " << c.dataset_name << '\n';
  out << "predictedFeature : " << c.predicted_feature << '\n';
  out << "seed : " << c.seed << '\n';
  return out.str();
}

inline std::string format_result(const SimulationResult& r) {
  const std::string bar(35, '=');
  std::ostringstream out;
  out << bar << " START OF SIMULATION " << bar << '\n';
  out << format_header(r.config) << '\n';
  out << report::format_metrics(r.metrics);
  out << bar << "= END OF SIMULATION =" << bar << '\n';
  return out.str();
}

inline json config_to_json(const SimConfig& c) {
  json j;
  j["numCandiates"] = c.num_candidates;
  j["numVoters"] = c.num_voters;
  j["numElections"] = c.num_elections;
  if (c.blindness.lo == c.blindness.hi)
    j["columnBlindness"] = c.blindness.lo;
  else
    j["columnBlindness"] = json::array({c.blindness.lo, c.blindness.hi});
  j["crowdBuildMethod"] = {{"name", c.quality.name}, {"mean", c.quality.mean}, {"standardDeviation", c.quality.sd}};
  j["dataSetName"] = c.dataset_name;
  j["predictedFeature"] = c.predicted_feature;
  j["seed"] = c.seed;
  return j;
}

inline json result_to_json(const SimulationResult& r) {
  json j = report::metrics_to_json(r.metrics);
  j["config"] = config_to_json(r.config);
  j["clampedVoters"] = r.clamped_voters;
  return j;
}

}  // namespace stagevote::sim
