#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagevote/ballot.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/grid.hpp"

// Comparison methods: plurality, instant runoff, and the crowd / best-voter
// comparators that work on raw numeric predictions instead of rankings.

namespace stagevote {

namespace detail {
// First preference that is not the abstention marker.
inline std::optional<std::size_t> first_choice(const Ballot& b, const CandidateRoster& roster) {
  for (const auto& id : b.prefs) {
    if (roster.is_idk(id)) continue;
    if (auto idx = roster.index_of(id)) return idx;
    throw ConfigError("ballot of '" + b.voter_id + "' names '" + id + "', not on the roster");
  }
  return std::nullopt;
}
}  // namespace detail

struct FptpResult {
  std::string winner;
  bool tie = false;  // the winner shared the top count with another candidate
  std::vector<std::size_t> first_preferences;  // per roster column
};

/// Plurality of sincere first preferences. Ties go to the earlier candidate in
/// roster order, except that NULL loses ties against real candidates.
inline FptpResult fptp_winner(const std::vector<Ballot>& ballots, const CandidateRoster& roster) {
  if (ballots.empty()) throw DegenerateError("fptp_winner: no ballots");
  FptpResult r;
  r.first_preferences.assign(roster.size(), 0);
  std::size_t counted = 0;
  for (const auto& b : ballots)
    if (auto c = detail::first_choice(b, roster)) {
      ++r.first_preferences[*c];
      ++counted;
    }
  if (counted == 0) throw DegenerateError("fptp_winner: every ballot is empty");

  const std::size_t null_col = roster.null_index();
  std::size_t best = 0;
  for (std::size_t c = 1; c < roster.size(); ++c) {
    const auto v = r.first_preferences[c], top = r.first_preferences[best];
    if (v > top || (v == top && best == null_col)) best = c;
  }
  const auto top = r.first_preferences[best];
  r.tie = std::count(r.first_preferences.begin(), r.first_preferences.end(), top) > 1;
  r.winner = roster.candidates()[best];
  return r;
}

struct IrvResult {
  std::string winner;
  std::vector<std::string> eliminated;  // in elimination order
  std::size_t rounds = 0;
};

/// Single-winner instant runoff. Each round every non-exhausted ballot counts
/// for its highest continuing preference; a candidate holding a strict
/// majority of those ballots wins. Otherwise the candidate with the fewest
/// votes is eliminated (ties: the one latest in roster order).
inline IrvResult irv_winner(const std::vector<Ballot>& ballots, const CandidateRoster& roster) {
  if (ballots.empty()) throw DegenerateError("irv_winner: no ballots");
  const std::size_t k = roster.size();

  // Ballots as column indices, abstention stamps dropped.
  std::vector<std::vector<std::size_t>> ranked;
  ranked.reserve(ballots.size());
  for (const auto& b : ballots) {
    std::vector<std::size_t> cols;
    for (const auto& id : b.prefs) {
      if (roster.is_idk(id)) continue;
      auto idx = roster.index_of(id);
      if (!idx) throw ConfigError("ballot of '" + b.voter_id + "' names '" + id + "', not on the roster");
      cols.push_back(*idx);
    }
    ranked.push_back(std::move(cols));
  }

  IrvResult r;
  std::vector<bool> continuing(k, true);
  std::size_t remaining = k;
  while (true) {
    ++r.rounds;
    std::vector<std::size_t> votes(k, 0);
    std::size_t active = 0;
    for (const auto& cols : ranked) {
      auto it = std::find_if(cols.begin(), cols.end(), [&](std::size_t c) { return continuing[c]; });
      if (it == cols.end()) continue;
      ++votes[*it];
      ++active;
    }

    std::optional<std::size_t> leader;
    for (std::size_t c = 0; c < k; ++c)
      if (continuing[c] && (!leader || votes[c] > votes[*leader])) leader = c;
    if (remaining == 1 || (active > 0 && 2 * votes[*leader] > active)) {
      r.winner = roster.candidates()[*leader];
      return r;
    }

    std::optional<std::size_t> loser;
    for (std::size_t c = 0; c < k; ++c)
      if (continuing[c] && (!loser || votes[c] <= votes[*loser])) loser = c;
    continuing[*loser] = false;
    --remaining;
    r.eliminated.push_back(roster.candidates()[*loser]);
  }
}

/// Real-valued predictions: one row per voter, one column per slate candidate.
struct PredictionMatrix {
  std::vector<std::string> slate;
  Grid<double> values;

  std::size_t voters() const noexcept { return values.rows(); }
};

namespace detail {
inline void check_predictions(const PredictionMatrix& pm) {
  if (pm.voters() == 0 || pm.slate.empty()) throw DegenerateError("prediction matrix is empty");
  if (pm.values.cols() != pm.slate.size()) throw ConfigError("prediction matrix width differs from slate size");
}

inline std::vector<std::string> rank_descending(const std::vector<std::string>& slate,
                                                const std::vector<double>& key) {
  std::vector<std::size_t> idx(slate.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(slate[i]);
  return out;
}
}  // namespace detail

// Column means, one per slate candidate.
inline std::vector<double> crowd_means(const PredictionMatrix& pm) {
  detail::check_predictions(pm);
  std::vector<double> m(pm.slate.size(), 0.0);
  for (std::size_t v = 0; v < pm.voters(); ++v)
    for (std::size_t c = 0; c < m.size(); ++c) m[c] += pm.values(v, c);
  for (auto& x : m) x /= static_cast<double>(pm.voters());
  return m;
}

// Column medians (mean of the two middle values for an even crowd).
inline std::vector<double> crowd_medians(const PredictionMatrix& pm) {
  detail::check_predictions(pm);
  std::vector<double> med(pm.slate.size());
  std::vector<double> col(pm.voters());
  for (std::size_t c = 0; c < med.size(); ++c) {
    for (std::size_t v = 0; v < pm.voters(); ++v) col[v] = pm.values(v, c);
    const std::size_t mid = col.size() / 2;
    std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid), col.end());
    double m = col[mid];
    if (col.size() % 2 == 0) m = 0.5 * (m + *std::max_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid)));
    med[c] = m;
  }
  return med;
}

// Slate ordered best first by mean prediction; ties keep slate order.
inline std::vector<std::string> crowd_mean_ranking(const PredictionMatrix& pm) {
  return detail::rank_descending(pm.slate, crowd_means(pm));
}

inline std::vector<std::string> crowd_median_ranking(const PredictionMatrix& pm) {
  return detail::rank_descending(pm.slate, crowd_medians(pm));
}

template <class V, class Item>
concept PredictorOf = requires(const V& v, const Item& item) {
  { v.predict(item) } -> std::convertible_to<double>;
};

template <class Item, PredictorOf<Item> V>
double mean_squared_error(const V& voter, std::span<const Item> items, std::span<const double> truth) {
  if (items.size() != truth.size() || items.empty())
    throw ConfigError("validation items and targets must be non-empty and aligned");
  double se = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double e = static_cast<double>(voter.predict(items[i])) - truth[i];
    se += e * e;
  }
  return se / static_cast<double>(items.size());
}

/// Index of the voter with the lowest validation MSE (first on ties).
template <class Item, PredictorOf<Item> V>
std::size_t best_voter(std::span<const V> crowd, std::span<const Item> items, std::span<const double> truth) {
  if (crowd.empty()) throw DegenerateError("best_voter: empty crowd");
  std::size_t best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < crowd.size(); ++v) {
    const double mse = mean_squared_error<Item>(crowd[v], items, truth);
    if (mse < best_mse) {
      best_mse = mse;
      best = v;
    }
  }
  return best;
}

}  // namespace stagevote
