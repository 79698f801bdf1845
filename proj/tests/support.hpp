#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "stagevote/stagevote.hpp"

namespace stagevote::testing {

inline CandidateRoster roster_of(std::vector<std::string> ids) {
  return CandidateRoster(std::move(ids), std::string(kNullToken));
}

// 100 voters in four groups of 25. Group g ranks L[g] first, X second, NULL
// third, then the remaining letters in cyclic order.
inline std::vector<Ballot> second_choice_ballots() {
  const std::string letters = "ABCD";
  std::vector<Ballot> out;
  for (int g = 0; g < 4; ++g)
    for (int i = 0; i < 25; ++i) {
      Ballot b{"v" + std::to_string(g * 25 + i + 1), {}};
      b.prefs.push_back(std::string(1, letters[g]));
      b.prefs.emplace_back("X");
      b.prefs.emplace_back(kNullToken);
      for (int j = 1; j < 4; ++j) b.prefs.push_back(std::string(1, letters[(g + j) % 4]));
      out.push_back(std::move(b));
    }
  return out;
}

inline CandidateRoster second_choice_roster() { return roster_of({"A", "B", "C", "D", "X", "NULL"}); }

// 20 voters, five with each of A-D first. Second preferences give stage-2
// scores A 65, B 55, C 40, D 40; eight voters put NULL third, so NULL sits at
// 40% from stage 3 on.
inline std::vector<Ballot> null_cutoff_ballots() {
  const std::array<std::string, 4> seconds{"BBCDD", "AAAAA", "AAABD", "BBBCC"};
  const std::string letters = "ABCD";
  std::vector<Ballot> out;
  int nulls = 0;
  for (std::size_t g = 0; g < 4; ++g)
    for (char s : seconds[g]) {
      Ballot b{"v" + std::to_string(out.size() + 1), {std::string(1, letters[g]), std::string(1, s)}};
      std::vector<std::string> rest;
      for (char c : letters)
        if (c != letters[g] && c != s) rest.emplace_back(1, c);
      if (nulls < 8) {
        b.prefs.emplace_back(kNullToken);
        ++nulls;
      }
      b.prefs.insert(b.prefs.end(), rest.begin(), rest.end());
      if (b.prefs.size() < 5) b.prefs.emplace_back(kNullToken);
      out.push_back(std::move(b));
    }
  return out;
}

inline CandidateRoster abcd_roster() { return roster_of({"A", "B", "C", "D", "NULL"}); }

// NULL leads stage 1 with half the first preferences.
inline std::vector<Ballot> protest_ballots() {
  return {{"p1", {"NULL", "A", "B", "C"}}, {"p2", {"NULL", "B", "A", "C"}}, {"p3", {"A", "B", "C", "NULL"}},
          {"p4", {"B", "A", "C", "NULL"}}, {"p5", {"C", "A", "B", "NULL"}}, {"p6", {"NULL", "C", "A", "B"}}};
}

inline CandidateRoster abc_roster() { return roster_of({"A", "B", "C", "NULL"}); }

// Random complete or truncated ballots over `roster` (no IDK stamps).
inline std::vector<Ballot> random_ballots(std::mt19937_64& rng, const CandidateRoster& roster, std::size_t voters,
                                          std::size_t min_len, std::size_t max_len) {
  std::vector<Ballot> out;
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  for (std::size_t v = 0; v < voters; ++v) {
    auto ids = roster.candidates();
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(len(rng));
    out.push_back({"v" + std::to_string(v), std::move(ids)});
  }
  return out;
}

// Random score table built directly (not from ballots): non-decreasing
// integer percentages per column, last column is NULL.
inline ScoreTable random_score_table(std::mt19937_64& rng, std::size_t stages, std::size_t k) {
  ScoreTable st;
  for (std::size_t c = 0; c + 1 < k; ++c) st.candidates.push_back("c" + std::to_string(c));
  st.candidates.emplace_back(kNullToken);
  st.scores = Grid<double>(stages, k, 0.0);
  st.n = 100;
  std::uniform_int_distribution<int> step(0, 40);
  for (std::size_t c = 0; c < k; ++c) {
    int v = 0;
    for (std::size_t s = 0; s < stages; ++s) {
      v = std::min(100, v + step(rng));
      st.scores(s, c) = v;
    }
  }
  st.column_order.resize(k);
  for (std::size_t c = 0; c < k; ++c) st.column_order[c] = c;
  return st;
}

// Stage-by-stage restatement of the window rules, used as an oracle for
// stage_window: a stage is pooled when some real candidate has crossed alpha
// (without NULL ahead of it) at or before it, and no NULL or gamma cut-off has
// triggered on the way there.
inline std::vector<std::size_t> brute_force_pool(const ScoreTable& st, const SelectionConfig& cfg) {
  const std::size_t null_col = *st.index_of(kNullToken);
  auto gamma_fires = [&](std::size_t t) {
    if (cfg.gamma.kind == GammaRule::Kind::none) return false;
    std::size_t over = 0, real = 0;
    for (std::size_t c = 0; c < st.num_candidates(); ++c) {
      if (c == null_col) continue;
      ++real;
      if (st.at(t, c) > 100.0 * cfg.gamma.gamma) ++over;
    }
    switch (cfg.gamma.kind) {
      case GammaRule::Kind::any_exceeds: return over > 0;
      case GammaRule::Kind::fraction_exceeds: return over >= cfg.gamma.fraction * static_cast<double>(real);
      case GammaRule::Kind::count_exceeds: return over >= cfg.gamma.count;
      default: return false;
    }
  };
  auto alpha_met = [&](std::size_t t) {
    for (std::size_t c = 0; c < st.num_candidates(); ++c)
      if (c != null_col && st.at(t, c) > 100.0 * cfg.alpha && st.at(t, null_col) <= st.at(t, c)) return true;
    return false;
  };
  const double null_cap = 100.0 * (cfg.beta ? *cfg.beta : cfg.alpha);
  const bool crossing_allowed = !cfg.beta || cfg.beta_mode == BetaMode::stop_before;

  std::vector<std::size_t> pool;
  for (std::size_t s = 1; s <= st.stages(); ++s) {
    bool reached = false, null_ok = true, gamma_ok = true;
    for (std::size_t t = 1; t <= s; ++t) {
      reached = reached || alpha_met(t);
      const bool crossed = st.at(t, null_col) > null_cap;
      if (crossed && (t < s || !crossing_allowed)) null_ok = false;
      if (gamma_fires(t)) gamma_ok = false;
    }
    if (reached && null_ok && gamma_ok) pool.push_back(s);
  }
  return pool;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout; stderr is discarded or merged in.
inline CommandResult run_command(const std::string& cmd, bool with_stderr = false) {
  CommandResult r;
  FILE* pipe = ::popen((cmd + (with_stderr ? " 2>&1" : " 2>/dev/null")).c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace stagevote::testing
