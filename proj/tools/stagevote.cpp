// stagevote: tally ballot files, run election simulations, and compute the
// minimum number of stages for a threshold.
//
//   stagevote tally ballots.csv --alpha 0.5
//   stagevote tally ballots.csv --alpha 0.5 --beta 0.3333 --gamma any:0.6666 --selector last
//   stagevote simulate config.json --seed 7
//   stagevote min-stages 100 5 0.5

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stagevote/stagevote.hpp"

namespace {

using namespace stagevote;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNullWinner = 2;

struct TallyOptions {
  std::string path;
  std::string candidates;
  std::string algorithm;
  double alpha = 0.5;
  std::optional<double> beta;
  std::string gamma;
  std::string selector;
  std::string beta_mode;
  std::size_t num_prefs = 0;
  bool literal = false;
  bool strict = false;
  std::string format = "text";
};

struct SimulateOptions {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string format = "text";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Distinct identifiers seen in the file, sorted, NULL last.
CandidateRoster infer_roster(const BallotFile& file) {
  std::set<std::string> ids;
  bool has_idk = false;
  for (const auto& b : file.ballots)
    for (const auto& p : b.prefs) {
      if (p == kIdkToken)
        has_idk = true;
      else if (p != kNullToken)
        ids.insert(p);
    }
  std::vector<std::string> roster(ids.begin(), ids.end());
  roster.emplace_back(kNullToken);
  std::optional<std::string> idk;
  if (has_idk) {
    roster.emplace_back(kIdkToken);
    idk = std::string(kIdkToken);
  }
  return CandidateRoster(std::move(roster), std::string(kNullToken), idk);
}

CandidateRoster inline_roster(const std::string& list, const BallotFile& file) {
  auto ids = split_list(list);
  const bool has_idk = std::find(ids.begin(), ids.end(), kIdkToken) != ids.end();
  CandidateRoster roster(ids, std::string(kNullToken), has_idk ? std::optional<std::string>(kIdkToken) : std::nullopt);

  std::set<std::string> seen;
  for (const auto& b : file.ballots)
    for (const auto& p : b.prefs) seen.insert(p);
  for (const auto& id : seen)
    if (!roster.contains(id)) {
      std::cerr << "warning: --candidates omits '" << id << "', which appears in the ballot file\n";
      break;
    }
  return roster;
}

int cmd_tally(const TallyOptions& opt) {
  std::ifstream in(opt.path);
  if (!in) {
    std::cerr << "error: cannot read '" << opt.path << "'\n";
    return kExitError;
  }
  const BallotFile file = parse_ballots(in);
  const CandidateRoster roster = opt.candidates.empty() ? infer_roster(file) : inline_roster(opt.candidates, file);

  const auto checked = validate_ballots(file.ballots, roster, {opt.strict});
  if (!checked.rejected.empty()) {
    for (const auto& r : checked.rejected) std::cerr << "invalid ballot: " << r.message() << '\n';
    return kExitError;
  }

  std::size_t num_prefs = opt.num_prefs ? opt.num_prefs : std::min(file.pref_columns, roster.size());
  if (num_prefs == 0 || num_prefs > roster.size()) {
    std::cerr << "error: --num-prefs must lie in [1, " << roster.size() << "]\n";
    return kExitError;
  }

  const TallySet t = tally(checked.accepted, roster, num_prefs, opt.literal ? Expansion::literal : Expansion::fractional);

  const bool beta_gamma = opt.algorithm == "betagamma" || (opt.algorithm.empty() &&
                          (opt.beta || !opt.gamma.empty() || !opt.selector.empty() || !opt.beta_mode.empty()));
  Decision d;
  if (beta_gamma) {
    SelectionConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.beta = opt.beta;
    cfg.gamma = GammaRule::parse(opt.gamma);
    if (!opt.selector.empty()) cfg.selector = parse_selector(opt.selector);
    if (!opt.beta_mode.empty()) cfg.beta_mode = parse_beta_mode(opt.beta_mode);
    cfg.validate();
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
    d = beta_gamma_winner(t.scores, cfg, roster.null_id());
  } else {
    d = basic_winner(t.scores, opt.alpha, roster.null_id());
  }

  if (opt.format == "json") {
    auto j = report::tally_to_json(t);
    j["decision"] = report::decision_to_json(d);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << report::format_tally(t) << '\n' << report::format_decision(d);
  }
  return d.null_winner ? kExitNullWinner : kExitOk;
}

int cmd_simulate(const SimulateOptions& opt) {
  std::ifstream in(opt.path);
  if (!in) {
    std::cerr << "error: cannot read '" << opt.path << "'\n";
    return kExitError;
  }
  std::stringstream text;
  text << in.rdbuf();
  auto json = nlohmann::ordered_json::parse(text.str(), nullptr, false);
  if (json.is_discarded()) {
    std::cerr << "error: " << opt.path << " is not valid JSON\n";
    return kExitError;
  }
  if (json.is_object() && !json.contains("seed") && !opt.seed)
    if (const char* env = std::getenv("STAGEVOTE_SEED")) json["seed"] = std::stoull(env);

  auto parsed = sim::config_from_json(json);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  if (opt.seed) parsed.config.seed = *opt.seed;
  if (opt.threads) parsed.config.threads = opt.threads;

  const auto result = sim::run_simulation(parsed.config);
  if (result.clamped_voters)
    std::cerr << "warning: " << result.clamped_voters
              << " voter(s) could not reach their target MSE and were clamped to the noise-free error\n";
  if (opt.format == "json")
    std::cout << sim::result_to_json(result).dump(2) << '\n';
  else
    std::cout << sim::format_result(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged cumulative ranked voting"};
  app.require_subcommand(1);

  TallyOptions tally_opt;
  auto* tally_cmd = app.add_subcommand("tally", "Tally a ballot CSV file and report the winner");
  tally_cmd->add_option("ballots", tally_opt.path, "Ballot CSV (voter_id,pref1,...,prefP)")->required();
  tally_cmd->add_option("--candidates", tally_opt.candidates, "Roster, e.g. A,B,C,NULL (default: inferred)");
  tally_cmd->add_option("--algorithm", tally_opt.algorithm, "basic or betagamma")
      ->check(CLI::IsMember({"basic", "betagamma"}));
  tally_cmd->add_option("--alpha", tally_opt.alpha, "Winning threshold in [0,1]")->check(CLI::Range(0.0, 1.0));
  tally_cmd->add_option("--beta", tally_opt.beta, "NULL discontent threshold in (0,1)");
  tally_cmd->add_option("--gamma", tally_opt.gamma, "Gamma rule: any:G, frac:F:G or count:C:G");
  tally_cmd->add_option("--selector", tally_opt.selector,
                        "Stage selector: First, Last, MinEntropy, MaxEntropy, MinVariance, MaxVariance, MaxStDev");
  tally_cmd->add_option("--beta-mode", tally_opt.beta_mode, "exclude (default) or include the beta crossing stage");
  tally_cmd->add_option("--num-prefs", tally_opt.num_prefs, "Preferences to tally (default: header columns)");
  tally_cmd->add_flag("--literal", tally_opt.literal, "Do not spread missing preferences over unstamped candidates");
  tally_cmd->add_flag("--strict", tally_opt.strict, "Reject repeated voter ids");
  tally_cmd->add_option("--format", tally_opt.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  SimulateOptions sim_opt;
  auto* sim_cmd = app.add_subcommand("simulate", "Run an election simulation from a JSON config");
  sim_cmd->add_option("config", sim_opt.path, "Simulation config (JSON)")->required();
  sim_cmd->add_option("--seed", sim_opt.seed, "Override the config seed (default: config, then $STAGEVOTE_SEED)");
  sim_cmd->add_option("--threads", sim_opt.threads, "Worker threads for elections");
  sim_cmd->add_option("--format", sim_opt.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::size_t voters = 0, candidates = 0;
  double alpha = 0.0;
  auto* min_cmd = app.add_subcommand("min-stages", "Least number of stages x with x > alpha * k");
  min_cmd->add_option("voters", voters, "Number of voters")->required();
  min_cmd->add_option("candidates", candidates, "Number of candidates, NULL included")->required();
  min_cmd->add_option("alpha", alpha, "Threshold in (0,1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*tally_cmd) return cmd_tally(tally_opt);
    if (*sim_cmd) return cmd_simulate(sim_opt);
    if (*min_cmd) {
      std::cout << min_stages(voters, candidates, alpha) << '\n';
      return kExitOk;
    }
  } catch (const stagevote::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
