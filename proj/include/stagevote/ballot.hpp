#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "stagevote/csv.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/grid.hpp"
#include "stagevote/rational.hpp"

namespace stagevote {

// Tokens naming the protest candidate and the abstention marker in ballot files.
inline constexpr std::string_view kNullToken = "NULL";
inline constexpr std::string_view kIdkToken = "IDK";

/// The ordered set of options on a ballot.
///
/// Holds the NULL (protest) candidate, which is tallied like any other option,
/// and optionally an "I don't know" marker whose stamps are ignored. The marker
/// never gets a column in the tally tables, so `size()` (k) counts only the
/// tallied options.
class CandidateRoster {
 public:
  CandidateRoster(std::vector<std::string> ids, std::string null_id,
                  std::optional<std::string> idk_id = std::nullopt)
      : null_id_(std::move(null_id)), idk_id_(std::move(idk_id)) {
    std::unordered_set<std::string> seen;
    bool has_null = false;
    bool has_idk = !idk_id_.has_value();
    for (auto& id : ids) {
      if (id.empty()) throw ConfigError("roster: empty candidate identifier");
      if (!seen.insert(id).second) throw ConfigError("roster: duplicate candidate '" + id + "'");
      if (id == null_id_) has_null = true;
      if (idk_id_ && id == *idk_id_) {
        has_idk = true;
        continue;
      }
      index_.emplace(id, tallied_.size());
      tallied_.push_back(std::move(id));
    }
    if (!has_null) throw ConfigError("roster: NULL candidate '" + null_id_ + "' is not listed");
    if (!has_idk) throw ConfigError("roster: abstention marker '" + *idk_id_ + "' is not listed");
    if (idk_id_ && *idk_id_ == null_id_) throw ConfigError("roster: NULL and abstention ids coincide");
    if (tallied_.size() < 2) throw ConfigError("roster: need at least one real candidate plus NULL");
  }

  // Tallied candidates in roster order (the abstention marker excluded).
  const std::vector<std::string>& candidates() const noexcept { return tallied_; }
  std::size_t size() const noexcept { return tallied_.size(); }
  const std::string& null_id() const noexcept { return null_id_; }
  const std::optional<std::string>& idk_id() const noexcept { return idk_id_; }
  std::size_t null_index() const { return index_.at(null_id_); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool is_idk(std::string_view id) const { return idk_id_ && *idk_id_ == id; }
  bool contains(std::string_view id) const { return is_idk(id) || index_of(id).has_value(); }

  friend bool operator==(const CandidateRoster& a, const CandidateRoster& b) {
    return a.tallied_ == b.tallied_ && a.null_id_ == b.null_id_ && a.idk_id_ == b.idk_id_;
  }

 private:
  std::vector<std::string> tallied_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string null_id_;
  std::optional<std::string> idk_id_;
};

// Preferences per ballot when nothing else is configured: k-1.
inline std::size_t default_num_prefs(const CandidateRoster& roster) {
  return std::max<std::size_t>(1, roster.size() - 1);
}

// Unchecked parse result.
struct RawBallot {
  std::string voter_id;
  std::vector<std::string> prefs;
  std::size_t line = 0;  // source line, 0 if not from a file

  friend bool operator==(const RawBallot&, const RawBallot&) = default;
};

// A valid ballot: distinct roster members, most preferred first.
struct Ballot {
  std::string voter_id;
  std::vector<std::string> prefs;

  friend bool operator==(const Ballot&, const Ballot&) = default;
};

struct BallotRejection {
  enum class Kind { DuplicateCandidate, UnknownCandidate, DuplicateVoter };

  Kind kind;
  std::string voter_id;
  std::string candidate;               // offending identifier (empty for DuplicateVoter)
  std::vector<std::size_t> positions;  // 1-based preference positions
  std::size_t line = 0;

  std::string message() const {
    std::string where = line ? "line " + std::to_string(line) + ": " : std::string{};
    std::string pos;
    for (auto p : positions) pos += (pos.empty() ? "" : ",") + std::to_string(p);
    switch (kind) {
      case Kind::DuplicateCandidate:
        return where + "voter '" + voter_id + "' ranks '" + candidate + "' more than once (positions " + pos + ")";
      case Kind::UnknownCandidate:
        return where + "voter '" + voter_id + "' ranks unknown candidate '" + candidate + "' at position " + pos;
      case Kind::DuplicateVoter:
        return where + "voter id '" + voter_id + "' appears more than once";
    }
    return where + "invalid ballot";
  }
};

using ValidationResult = std::variant<Ballot, BallotRejection>;

inline ValidationResult validate_ballot(const RawBallot& raw, const CandidateRoster& roster) {
  std::unordered_map<std::string_view, std::size_t> first_seen;
  for (std::size_t i = 0; i < raw.prefs.size(); ++i) {
    const std::string& id = raw.prefs[i];
    if (!roster.contains(id))
      return BallotRejection{BallotRejection::Kind::UnknownCandidate, raw.voter_id, id, {i + 1}, raw.line};
    auto [it, fresh] = first_seen.emplace(id, i + 1);
    if (!fresh) {
      std::vector<std::size_t> pos;
      for (std::size_t j = 0; j < raw.prefs.size(); ++j)
        if (raw.prefs[j] == id) pos.push_back(j + 1);
      return BallotRejection{BallotRejection::Kind::DuplicateCandidate, raw.voter_id, id, std::move(pos), raw.line};
    }
  }
  return Ballot{raw.voter_id, raw.prefs};
}

struct ValidationOptions {
  bool strict_voter_ids = false;  // reject repeated voter ids after the first
};

struct ValidatedBallots {
  std::vector<Ballot> accepted;
  std::vector<BallotRejection> rejected;
};

inline ValidatedBallots validate_ballots(const std::vector<RawBallot>& raws, const CandidateRoster& roster,
                                         ValidationOptions opts = {}) {
  ValidatedBallots out;
  std::unordered_set<std::string> voters;
  for (const auto& raw : raws) {
    if (opts.strict_voter_ids && !voters.insert(raw.voter_id).second) {
      out.rejected.push_back({BallotRejection::Kind::DuplicateVoter, raw.voter_id, {}, {}, raw.line});
      continue;
    }
    auto r = validate_ballot(raw, roster);
    if (auto* b = std::get_if<Ballot>(&r))
      out.accepted.push_back(std::move(*b));
    else
      out.rejected.push_back(std::get<BallotRejection>(std::move(r)));
  }
  return out;
}

// Contents of a ballot CSV file.
struct BallotFile {
  std::size_t pref_columns = 0;  // P, from the header
  std::vector<RawBallot> ballots;
};

/// Reads the ballot CSV format: a header `voter_id,pref1,...,prefP` followed by
/// one row per voter. Empty cells may only trail the filled ones; rows may be
/// shorter than the header.
inline BallotFile parse_ballots(std::istream& in) {
  BallotFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    auto cells = csv::split_record(line, line_no);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "voter_id")
        throw FormatError("ballot header must be 'voter_id,pref1,...,prefP'");
      for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i] != "pref" + std::to_string(i))
          throw FormatError("ballot header column " + std::to_string(i + 1) + " must be 'pref" +
                            std::to_string(i) + "', got '" + cells[i] + "'");
      file.pref_columns = cells.size() - 1;
      have_header = true;
      continue;
    }

    if (cells.size() > file.pref_columns + 1)
      throw ParseError(line_no, "row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(file.pref_columns + 1));
    RawBallot raw{cells[0], {}, line_no};
    bool gap = false;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        gap = true;
      } else if (gap) {
        throw ParseError(line_no, "empty preference cell before pref" + std::to_string(i));
      } else {
        raw.prefs.push_back(std::move(cells[i]));
      }
    }
    file.ballots.push_back(std::move(raw));
  }
  if (!have_header) throw FormatError("ballot file is empty (missing header)");
  return file;
}

inline void write_ballots_csv(std::ostream& out, const std::vector<Ballot>& ballots, std::size_t pref_columns) {
  out << "voter_id";
  for (std::size_t i = 1; i <= pref_columns; ++i) out << ",pref" << i;
  out << '\n';
  for (const auto& b : ballots) {
    out << csv::escape(b.voter_id);
    for (std::size_t i = 0; i < pref_columns; ++i) {
      out << ',';
      if (i < b.prefs.size()) out << csv::escape(b.prefs[i]);
    }
    out << '\n';
  }
}

/// Per-(preference, candidate) weights of one ballot. Rows are preferences
/// 1..P, columns follow `CandidateRoster::candidates()`.
struct FractionalBallot {
  Grid<Fraction> weights;

  std::size_t num_prefs() const { return weights.rows(); }
  Fraction row_sum(std::size_t pref) const {
    Fraction s;
    for (const auto& w : weights.row(pref)) s += w;
    return s;
  }
};

enum class Expansion {
  fractional,  // missing preferences are split evenly over the unstamped candidates
  literal,     // missing preferences contribute nothing
};

/// Expands a valid ballot into per-preference weights over the first
/// `num_prefs` preferences. A stamp gives weight 1 to its candidate. Under
/// `Expansion::fractional` each missing preference (an absent stamp or an
/// "I don't know" stamp) gives 1/m to each of the m candidates not stamped
/// anywhere on the (truncated) ballot, so every row sums to exactly 1.
inline FractionalBallot expand_incomplete(const Ballot& b, const CandidateRoster& roster, std::size_t num_prefs,
                                          Expansion mode = Expansion::fractional) {
  const std::size_t k = roster.size();
  if (num_prefs == 0 || num_prefs > k)
    throw ConfigError("num_prefs must lie in [1, " + std::to_string(k) + "], got " + std::to_string(num_prefs));

  FractionalBallot fb{Grid<Fraction>(num_prefs, k)};
  std::vector<bool> stamped(k, false);
  std::vector<std::optional<std::size_t>> column(num_prefs);
  for (std::size_t i = 0; i < num_prefs && i < b.prefs.size(); ++i) {
    if (roster.is_idk(b.prefs[i])) continue;
    auto idx = roster.index_of(b.prefs[i]);
    if (!idx) throw ConfigError("ballot of '" + b.voter_id + "' names '" + b.prefs[i] + "', not on the roster");
    column[i] = *idx;
    stamped[*idx] = true;
  }

  const auto unstamped = static_cast<std::int64_t>(std::count(stamped.begin(), stamped.end(), false));
  for (std::size_t i = 0; i < num_prefs; ++i) {
    if (column[i]) {
      fb.weights(i, *column[i]) = 1;
    } else if (mode == Expansion::fractional) {
      // unstamped >= 1: at most num_prefs - 1 <= k - 1 other rows hold stamps.
      const Fraction share(1, unstamped);
      for (std::size_t c = 0; c < k; ++c)
        if (!stamped[c]) fb.weights(i, c) = share;
    }
  }
  return fb;
}

}  // namespace stagevote
