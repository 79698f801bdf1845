#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagevote/ballot.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/grid.hpp"

// Stage tallying. Stage numbers in this API are 1-based: stage i aggregates
// preferences 1..i. Row i-1 of every grid holds stage (or preference) i.

namespace stagevote {

// Vote mass per (preference, candidate). Entries need not be integral once
// incomplete ballots are expanded fractionally.
struct VoteCountTable {
  std::vector<std::string> candidates;
  Grid<double> counts;
  std::size_t n = 0;  // number of ballots
};

// Running column sums of the vote counts (cumulative count up to each stage).
struct ProcessedTable {
  std::vector<std::string> candidates;
  Grid<double> cumulative;
  std::size_t n = 0;
};

// Percentage of voters that ranked each candidate within the first i preferences.
struct ScoreTable {
  std::vector<std::string> candidates;
  Grid<double> scores;
  std::size_t n = 0;
  // Presentation / tie-break order of the columns; identity until sort_columns.
  std::vector<std::size_t> column_order;

  std::size_t stages() const noexcept { return scores.rows(); }
  std::size_t num_candidates() const noexcept { return candidates.size(); }
  double at(std::size_t stage, std::size_t column) const { return scores(stage - 1, column); }
  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = std::find(candidates.begin(), candidates.end(), id);
    if (it == candidates.end()) return std::nullopt;
    return static_cast<std::size_t>(it - candidates.begin());
  }
};

inline VoteCountTable count_votes(std::span<const FractionalBallot> ballots, const CandidateRoster& roster,
                                  std::size_t num_prefs) {
  const std::size_t k = roster.size();
  VoteCountTable vc{roster.candidates(), Grid<double>(num_prefs, k, 0.0), ballots.size()};
  for (const auto& b : ballots) {
    if (b.weights.rows() != num_prefs || b.weights.cols() != k)
      throw ConfigError("count_votes: ballot expanded over a different roster or preference count");
    for (std::size_t i = 0; i < num_prefs; ++i)
      for (std::size_t c = 0; c < k; ++c) vc.counts(i, c) += b.weights(i, c).to_double();
  }
  return vc;
}

inline ProcessedTable cumulate(const VoteCountTable& vc) {
  ProcessedTable pt{vc.candidates, vc.counts, vc.n};
  for (std::size_t i = 1; i < pt.cumulative.rows(); ++i)
    for (std::size_t c = 0; c < pt.cumulative.cols(); ++c) pt.cumulative(i, c) += pt.cumulative(i - 1, c);
  return pt;
}

inline ScoreTable score(const ProcessedTable& pt) {
  if (pt.n == 0) throw DegenerateError("score: no ballots, percentages are undefined");
  ScoreTable st{pt.candidates, pt.cumulative, pt.n, {}};
  const double n = static_cast<double>(pt.n);
  for (std::size_t i = 0; i < st.scores.rows(); ++i)
    for (std::size_t c = 0; c < st.scores.cols(); ++c) st.scores(i, c) = 100.0 * pt.cumulative(i, c) / n;
  st.column_order.resize(st.candidates.size());
  std::iota(st.column_order.begin(), st.column_order.end(), std::size_t{0});
  return st;
}

namespace detail {
inline void check_stage(const ScoreTable& st, std::size_t stage) {
  if (stage == 0 || stage > st.stages())
    throw ConfigError("stage " + std::to_string(stage) + " outside [1, " + std::to_string(st.stages()) + "]");
}
}  // namespace detail

// Share of the stage's cumulative vote mass held by each candidate.
inline std::vector<double> stage_distribution(const ScoreTable& st, std::size_t stage) {
  detail::check_stage(st, stage);
  auto row = st.scores.row(stage - 1);
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateError("stage " + std::to_string(stage) + " has no vote mass");
  std::vector<double> p(row.size());
  std::transform(row.begin(), row.end(), p.begin(), [total](double s) { return s / total; });
  return p;
}

// Shannon entropy in bits of stage_distribution, with 0 log 0 = 0.
inline double stage_entropy(const ScoreTable& st, std::size_t stage) {
  double h = 0.0;
  for (double p : stage_distribution(st, stage))
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

// Population variance of the stage's score row.
inline double stage_variance(const ScoreTable& st, std::size_t stage) {
  detail::check_stage(st, stage);
  auto row = st.scores.row(stage - 1);
  const double k = static_cast<double>(row.size());
  const double mean = std::accumulate(row.begin(), row.end(), 0.0) / k;
  double ss = 0.0;
  for (double s : row) ss += (s - mean) * (s - mean);
  return ss / k;
}

inline double stage_stddev(const ScoreTable& st, std::size_t stage) { return std::sqrt(stage_variance(st, stage)); }

/// Orders columns by decreasing score, comparing the last stage first and
/// falling back to earlier stages on ties. Fully tied columns keep roster
/// order. Only `column_order` changes.
inline ScoreTable sort_columns(ScoreTable st) {
  std::vector<std::size_t> order(st.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t stages = st.stages();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = stages; i-- > 0;) {
      if (st.scores(i, a) != st.scores(i, b)) return st.scores(i, a) > st.scores(i, b);
    }
    return false;
  });
  st.column_order = std::move(order);
  return st;
}

// The three aligned tables for one election.
struct TallySet {
  VoteCountTable counts;
  ProcessedTable processed;
  ScoreTable scores;  // columns sorted
};

inline TallySet tally(const std::vector<Ballot>& ballots, const CandidateRoster& roster, std::size_t num_prefs,
                      Expansion mode = Expansion::fractional) {
  std::vector<FractionalBallot> expanded;
  expanded.reserve(ballots.size());
  for (const auto& b : ballots) expanded.push_back(expand_incomplete(b, roster, num_prefs, mode));
  TallySet t;
  t.counts = count_votes(expanded, roster, num_prefs);
  t.processed = cumulate(t.counts);
  t.scores = sort_columns(score(t.processed));
  return t;
}

}  // namespace stagevote
