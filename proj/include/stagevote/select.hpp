#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagevote/ballot.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/tally.hpp"

namespace stagevote {

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v))
    throw ConfigError(std::string(what) + ": '" + std::string(s) + "' is not a number");
  return v;
}

// Shortest decimal that round-trips, e.g. 0.5 -> "0.5", 100 -> "100".
inline std::string format_number(double v) {
  char buf[64];
  const double mag = std::abs(v);
  if (v == 0.0 || (mag >= 1e-6 && mag < 1e15)) {
    for (int decimals = 0; decimals <= 20; ++decimals) {
      std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
      if (std::strtod(buf, nullptr) == v) return buf;
    }
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

/// Stage-invalidity rule on the real (non-NULL) candidates' scores.
///
///   any(g)         a stage is invalid once any candidate exceeds 100*g
///   fraction(f, g) ... once at least a fraction f of candidates exceed 100*g
///   count(c, g)    ... once at least c candidates exceed 100*g
struct GammaRule {
  enum class Kind { none, any_exceeds, fraction_exceeds, count_exceeds };

  Kind kind = Kind::none;
  double gamma = 0.0;
  double fraction = 1.0;
  std::size_t count = 1;

  static GammaRule none() { return {}; }
  static GammaRule any(double g) { return {Kind::any_exceeds, g, 1.0, 1}; }
  static GammaRule fraction_of(double f, double g) { return {Kind::fraction_exceeds, g, f, 1}; }
  static GammaRule count_of(std::size_t c, double g) { return {Kind::count_exceeds, g, 1.0, c}; }

  void validate() const {
    if (kind == Kind::none) return;
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (kind == Kind::fraction_exceeds && !(fraction > 0.0 && fraction <= 1.0))
      throw ConfigError("gamma fraction must lie in (0,1]");
    if (kind == Kind::count_exceeds && count < 1) throw ConfigError("gamma count must be >= 1");
  }

  bool fires(std::span<const double> real_scores) const {
    if (kind == Kind::none) return false;
    const double cap = 100.0 * gamma;
    const auto over = static_cast<std::size_t>(
        std::count_if(real_scores.begin(), real_scores.end(), [cap](double s) { return s > cap; }));
    switch (kind) {
      case Kind::any_exceeds:
        return over >= 1;
      case Kind::fraction_exceeds:
        return static_cast<double>(over) >= fraction * static_cast<double>(real_scores.size());
      case Kind::count_exceeds:
        return over >= count;
      case Kind::none:
        break;
    }
    return false;
  }

  // Grammar: none | any:G | frac:F:G | count:C:G
  static GammaRule parse(std::string_view text) {
    if (text.empty() || text == "none") return none();
    std::vector<std::string_view> parts;
    for (std::size_t pos = 0;;) {
      auto colon = text.find(':', pos);
      parts.push_back(text.substr(pos, colon == std::string_view::npos ? colon : colon - pos));
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
    GammaRule r;
    if (parts[0] == "any" && parts.size() == 2) {
      r = any(detail::parse_double(parts[1], "gamma"));
    } else if (parts[0] == "frac" && parts.size() == 3) {
      r = fraction_of(detail::parse_double(parts[1], "gamma fraction"), detail::parse_double(parts[2], "gamma"));
    } else if (parts[0] == "count" && parts.size() == 3) {
      const double c = detail::parse_double(parts[1], "gamma count");
      if (c < 1 || c != std::floor(c)) throw ConfigError("gamma count must be a positive integer");
      r = count_of(static_cast<std::size_t>(c), detail::parse_double(parts[2], "gamma"));
    } else {
      throw ConfigError("gamma rule '" + std::string(text) + "' must be any:G, frac:F:G or count:C:G");
    }
    r.validate();
    return r;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::none:
        return "none";
      case Kind::any_exceeds:
        return "any:" + detail::format_number(gamma);
      case Kind::fraction_exceeds:
        return "frac:" + detail::format_number(fraction) + ":" + detail::format_number(gamma);
      case Kind::count_exceeds:
        return "count:" + std::to_string(count) + ":" + detail::format_number(gamma);
    }
    return "none";
  }

  friend bool operator==(const GammaRule&, const GammaRule&) = default;
};

enum class Selector { First, Last, MinEntropy, MaxEntropy, MinVariance, MaxVariance, MaxStDev };

inline constexpr std::array kAllSelectors{Selector::First,       Selector::Last,        Selector::MinEntropy,
                                          Selector::MaxEntropy,  Selector::MinVariance, Selector::MaxVariance,
                                          Selector::MaxStDev};

inline std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::First: return "First";
    case Selector::Last: return "Last";
    case Selector::MinEntropy: return "MinEntropy";
    case Selector::MaxEntropy: return "MaxEntropy";
    case Selector::MinVariance: return "MinVariance";
    case Selector::MaxVariance: return "MaxVariance";
    case Selector::MaxStDev: return "MaxStDev";
  }
  return "First";
}

// Case-insensitive.
inline Selector parse_selector(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const auto want = lower(text);
  for (auto s : kAllSelectors)
    if (lower(to_string(s)) == want) return s;
  throw ConfigError("unknown stage selector '" + std::string(text) + "'");
}

// What happens to the stage at which NULL first exceeds the beta threshold.
enum class BetaMode {
  exclude_stage,  // the crossing stage is outside the pool (default)
  stop_before,    // the crossing stage is the last pooled stage
};

inline std::string_view to_string(BetaMode m) { return m == BetaMode::exclude_stage ? "exclude" : "include"; }

inline BetaMode parse_beta_mode(std::string_view text) {
  if (text == "exclude" || text == "exclude_stage") return BetaMode::exclude_stage;
  if (text == "include" || text == "stop_before") return BetaMode::stop_before;
  throw ConfigError("beta mode must be 'exclude' or 'include', got '" + std::string(text) + "'");
}

struct SelectionConfig {
  double alpha = 0.5;
  std::optional<double> beta;
  GammaRule gamma;
  Selector selector = Selector::First;
  BetaMode beta_mode = BetaMode::exclude_stage;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (beta && !(*beta > 0.0 && *beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
    gamma.validate();
  }

  // Legal but unusual settings worth surfacing to the user.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (beta && *beta >= alpha) w.emplace_back("beta >= alpha: NULL may outscore a qualifying candidate in the pool");
    if (gamma.kind != GammaRule::Kind::none && gamma.gamma <= alpha)
      w.emplace_back("gamma <= alpha: every alpha-qualifying stage is also gamma-invalid");
    return w;
  }

  // e.g. "MyVoteSys <α=0.50, β=0.33, γ=____, MinEntropy>"
  std::string label() const {
    auto fixed2 = [](double v) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      return std::string(buf);
    };
    std::string g = "____";
    if (gamma.kind == GammaRule::Kind::any_exceeds)
      g = fixed2(gamma.gamma);
    else if (gamma.kind != GammaRule::Kind::none)
      g = gamma.to_string();
    std::string s = "MyVoteSys <α=" + fixed2(alpha) + ", β=" + (beta ? fixed2(*beta) : std::string("____")) +
                    ", γ=" + g + ", " + std::string(to_string(selector));
    if (beta_mode == BetaMode::stop_before) s += ", β-inclusive";
    return s + ">";
  }

  friend bool operator==(const SelectionConfig&, const SelectionConfig&) = default;
};

/// Stages at which a BetaGamma winner may be chosen.
///
/// Stage numbers are 1-based; 0 in a `last_by_*` field means no stage passes
/// that cut-off. The pool is the run of consecutive stages
/// [first_by_alpha, min(last_by_beta, last_by_gamma)].
struct StageWindow {
  std::optional<std::size_t> first_by_alpha;
  std::size_t last_by_beta = 0;   // NULL cut-off (beta rule, or alpha when beta is unset)
  std::size_t last_by_gamma = 0;
  std::size_t pool_begin = 0;     // 0 when the pool is empty
  std::size_t pool_end = 0;

  bool empty() const noexcept { return pool_begin == 0; }
  bool contains(std::size_t stage) const noexcept { return !empty() && stage >= pool_begin && stage <= pool_end; }
  std::vector<std::size_t> pool() const {
    std::vector<std::size_t> p;
    for (std::size_t s = pool_begin; !empty() && s <= pool_end; ++s) p.push_back(s);
    return p;
  }

  friend bool operator==(const StageWindow&, const StageWindow&) = default;
};

// Entropy / spread of every stage of a score table, indexed by stage - 1.
struct StageStats {
  std::vector<double> entropy;
  std::vector<double> variance;
  std::vector<double> stddev;
};

inline StageStats compute_stage_stats(const ScoreTable& st) {
  StageStats stats;
  for (std::size_t s = 1; s <= st.stages(); ++s) {
    double h = 0.0;
    try {
      h = stage_entropy(st, s);
    } catch (const DegenerateError&) {
      // zero-mass stage (only possible with literal expansion): treat as 0 bits
    }
    stats.entropy.push_back(h);
    stats.variance.push_back(stage_variance(st, s));
    stats.stddev.push_back(std::sqrt(stats.variance.back()));
  }
  return stats;
}

struct StageDiagnostics {
  std::size_t stage = 0;
  double entropy = 0.0;
  double variance = 0.0;
};

struct Decision {
  enum class Algorithm { basic, beta_gamma };

  Algorithm algorithm = Algorithm::basic;
  std::string winner;
  bool null_winner = false;
  std::optional<std::size_t> stage;
  std::optional<double> score;
  std::optional<std::size_t> selected_stage;  // selector's pick, before any step-back
  bool fallback = false;  // basic rule: no stage crossed alpha, decided at the final stage
  StageWindow window;
  SelectionConfig config;
  std::string null_id;
  std::vector<StageDiagnostics> diagnostics;
};

namespace detail {

inline std::size_t require_null_column(const ScoreTable& st, std::string_view null_id) {
  auto idx = st.index_of(null_id);
  if (!idx) throw ConfigError("score table has no NULL column '" + std::string(null_id) + "'");
  return *idx;
}

inline std::vector<std::size_t> tie_order(const ScoreTable& st) {
  return st.column_order.size() == st.num_candidates() ? st.column_order : sort_columns(st).column_order;
}

// Highest-scoring column at `stage` among those accepted by `eligible`. Ties go
// to the earlier column in `order`, except that NULL never wins a tie against a
// real candidate.
template <class Pred>
std::optional<std::size_t> best_column(const ScoreTable& st, std::size_t stage, std::span<const std::size_t> order,
                                       std::optional<std::size_t> null_col, Pred eligible) {
  std::optional<std::size_t> best;
  for (std::size_t c : order) {
    if (!eligible(c)) continue;
    const double v = st.at(stage, c);
    if (!best || v > st.at(stage, *best) || (v == st.at(stage, *best) && *best == null_col && c != null_col))
      best = c;
  }
  return best;
}

inline std::vector<double> real_scores(const ScoreTable& st, std::size_t stage, std::size_t null_col) {
  std::vector<double> out;
  for (std::size_t c = 0; c < st.num_candidates(); ++c)
    if (c != null_col) out.push_back(st.at(stage, c));
  return out;
}

}  // namespace detail

/// Basic rule: advance stage by stage until some candidate's score exceeds
/// 100*alpha; the highest score at that stage wins. If no stage qualifies the
/// highest score at the final stage wins and `fallback` is set. NULL competes
/// like any candidate but loses exact ties.
inline Decision basic_winner(const ScoreTable& st, double alpha, std::string_view null_id = kNullToken) {
  if (st.stages() == 0 || st.num_candidates() == 0) throw DegenerateError("basic_winner: empty score table");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");

  const auto order = detail::tie_order(st);
  const auto null_col = st.index_of(null_id);
  const double threshold = 100.0 * alpha;
  auto any = [](std::size_t) { return true; };

  Decision d;
  d.algorithm = Decision::Algorithm::basic;
  d.config.alpha = alpha;
  d.null_id = std::string(null_id);

  std::size_t stage = 0;
  for (std::size_t s = 1; s <= st.stages() && stage == 0; ++s) {
    auto row = st.scores.row(s - 1);
    if (std::any_of(row.begin(), row.end(), [threshold](double v) { return v > threshold; })) stage = s;
  }
  if (stage == 0) {
    stage = st.stages();
    d.fallback = true;
  }
  const std::size_t w = *detail::best_column(st, stage, order, null_col, any);
  d.winner = st.candidates[w];
  d.null_winner = null_col && w == *null_col;
  d.stage = stage;
  d.selected_stage = stage;
  d.score = st.at(stage, w);
  return d;
}

/// Computes the BetaGamma stage window.
///
/// first_by_alpha is the first stage where some real candidate exceeds
/// 100*alpha without NULL scoring strictly higher than it. The NULL cut-off
/// stops at the first stage where NULL exceeds 100*beta (that stage excluded
/// or included per `beta_mode`); with beta unset NULL is held to alpha instead
/// and the crossing stage is kept. last_by_gamma is the stage before the gamma
/// rule first fires.
inline StageWindow stage_window(const ScoreTable& st, const SelectionConfig& cfg, std::string_view null_id) {
  cfg.validate();
  const std::size_t null_col = detail::require_null_column(st, null_id);
  const std::size_t stages = st.stages();
  const double alpha_cap = 100.0 * cfg.alpha;
  StageWindow w;

  for (std::size_t s = 1; s <= stages && !w.first_by_alpha; ++s) {
    const double null_score = st.at(s, null_col);
    for (std::size_t c = 0; c < st.num_candidates(); ++c) {
      if (c == null_col) continue;
      const double v = st.at(s, c);
      if (v > alpha_cap && null_score <= v) {
        w.first_by_alpha = s;
        break;
      }
    }
  }

  const double null_cap = 100.0 * cfg.beta.value_or(cfg.alpha);
  const bool keep_crossing = !cfg.beta || cfg.beta_mode == BetaMode::stop_before;
  w.last_by_beta = stages;
  for (std::size_t s = 1; s <= stages; ++s) {
    if (st.at(s, null_col) > null_cap) {
      w.last_by_beta = keep_crossing ? s : s - 1;
      break;
    }
  }

  w.last_by_gamma = stages;
  for (std::size_t s = 1; s <= stages; ++s) {
    if (cfg.gamma.fires(detail::real_scores(st, s, null_col))) {
      w.last_by_gamma = s - 1;
      break;
    }
  }

  const std::size_t end = std::min(w.last_by_beta, w.last_by_gamma);
  if (w.first_by_alpha && *w.first_by_alpha <= end) {
    w.pool_begin = *w.first_by_alpha;
    w.pool_end = end;
  }
  return w;
}

/// Picks the decision stage from the pool. Extremal selectors take the
/// earliest stage on exact ties; MaxStDev ranks by variance, so it always
/// agrees with MaxVariance.
inline std::size_t select_stage(const StageWindow& window, Selector selector, const StageStats& stats) {
  if (window.empty()) throw DegenerateError("select_stage: empty stage pool");
  if (stats.entropy.size() < window.pool_end || stats.variance.size() < window.pool_end)
    throw ConfigError("select_stage: statistics do not cover the pool");

  auto extremal = [&](const std::vector<double>& v, bool want_max) {
    std::size_t best = window.pool_begin;
    for (std::size_t s = window.pool_begin + 1; s <= window.pool_end; ++s) {
      const double a = v[s - 1], b = v[best - 1];
      if (want_max ? a > b : a < b) best = s;
    }
    return best;
  };

  switch (selector) {
    case Selector::First: return window.pool_begin;
    case Selector::Last: return window.pool_end;
    case Selector::MinEntropy: return extremal(stats.entropy, false);
    case Selector::MaxEntropy: return extremal(stats.entropy, true);
    case Selector::MinVariance: return extremal(stats.variance, false);
    case Selector::MaxVariance:
    case Selector::MaxStDev: return extremal(stats.variance, true);
  }
  return window.pool_begin;
}

/// BetaGamma rule. With an empty window NULL wins. Otherwise the selector
/// picks a pooled stage s and the best real candidate at s wins, provided it
/// exceeds 100*alpha and NULL does not outscore it there; when NULL leads at
/// s the decision steps back to the latest earlier pooled stage that has such
/// a candidate.
inline Decision beta_gamma_winner(const ScoreTable& st, const SelectionConfig& cfg, std::string_view null_id) {
  const StageWindow window = stage_window(st, cfg, null_id);
  const std::size_t null_col = detail::require_null_column(st, null_id);
  const StageStats stats = compute_stage_stats(st);

  Decision d;
  d.algorithm = Decision::Algorithm::beta_gamma;
  d.config = cfg;
  d.null_id = std::string(null_id);
  d.window = window;
  for (std::size_t s : window.pool()) d.diagnostics.push_back({s, stats.entropy[s - 1], stats.variance[s - 1]});

  if (window.empty()) {
    d.winner = std::string(null_id);
    d.null_winner = true;
    return d;
  }

  const auto order = detail::tie_order(st);
  const double alpha_cap = 100.0 * cfg.alpha;
  const std::size_t picked = select_stage(window, cfg.selector, stats);
  d.selected_stage = picked;

  for (std::size_t s = picked; s >= window.pool_begin; --s) {
    const double null_score = st.at(s, null_col);
    auto eligible = [&](std::size_t c) {
      return c != null_col && st.at(s, c) > alpha_cap && st.at(s, c) >= null_score;
    };
    if (auto w = detail::best_column(st, s, order, std::nullopt, eligible)) {
      d.winner = st.candidates[*w];
      d.stage = s;
      d.score = st.at(s, *w);
      return d;
    }
    if (s == window.pool_begin) break;
  }
  // Unreachable: pool_begin has a qualifying candidate by construction.
  throw DegenerateError("beta_gamma_winner: no qualifying candidate in a non-empty pool");
}

/// Fewest stages guaranteeing some candidate can exceed the alpha threshold
/// when votes are spread evenly: the least integer x with x > alpha*k. The
/// voter count cancels out and is accepted only for symmetry with the formula.
inline std::size_t min_stages(std::size_t /*voters*/, std::size_t candidates, double alpha) {
  if (candidates < 1) throw ConfigError("min_stages: need at least one candidate");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("min_stages: alpha must lie in (0,1)");
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(candidates))) + 1;
}

}  // namespace stagevote
