#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stagevote/select.hpp"
#include "stagevote/sim.hpp"
#include "stagevote/tally.hpp"

// Text and JSON renderings of tallies, decisions and simulation metrics.

namespace stagevote::report {

using json = nlohmann::ordered_json;

// Integral values print as integers, others with up to four decimals.
inline std::string format_amount(double v) {
  if (std::abs(v - std::round(v)) < 1e-9) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", std::round(v) + 0.0);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

// Display width of UTF-8 text (code points; the labels only use narrow glyphs).
inline std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline std::string pad_left(std::string_view s, std::size_t width) {
  const auto w = display_width(s);
  return std::string(width > w ? width - w : 0, ' ') + std::string(s);
}

inline std::string pad_right(std::string_view s, std::size_t width) {
  const auto w = display_width(s);
  return std::string(s) + std::string(width > w ? width - w : 0, ' ');
}

/// Renders a stage-by-candidate grid under a title, e.g.
///
///   Vote Counts
///                A   B  ...
///   Preference1  25  25 ...
inline std::string format_grid(std::string_view title, std::string_view row_prefix,
                               const std::vector<std::string>& columns, const Grid<double>& grid,
                               std::string_view suffix = {}) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < grid.rows(); ++i) labels.push_back(std::string(row_prefix) + std::to_string(i + 1));
  std::size_t label_w = 0;
  for (const auto& l : labels) label_w = std::max(label_w, display_width(l));

  std::vector<std::vector<std::string>> cells(grid.rows(), std::vector<std::string>(columns.size()));
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c] = display_width(columns[c]);
    for (std::size_t i = 0; i < grid.rows(); ++i) {
      cells[i][c] = format_amount(grid(i, c)) + std::string(suffix);
      width[c] = std::max(width[c], display_width(cells[i][c]));
    }
  }

  std::ostringstream out;
  out << title << '\n' << std::string(label_w, ' ');
  for (std::size_t c = 0; c < columns.size(); ++c) out << "  " << pad_left(columns[c], width[c]);
  out << '\n';
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    out << pad_right(labels[i], label_w);
    for (std::size_t c = 0; c < columns.size(); ++c) out << "  " << pad_left(cells[i][c], width[c]);
    out << '\n';
  }
  return out.str();
}

inline std::string format_tally(const TallySet& t) {
  return format_grid("Vote Counts", "Preference", t.counts.candidates, t.counts.counts) + '\n' +
         format_grid("Processed Vote Counts", "Stage", t.processed.candidates, t.processed.cumulative) + '\n' +
         format_grid("Score of Candidates", "Stage", t.scores.candidates, t.scores.scores, "%");
}

inline json grid_to_json(const std::vector<std::string>& candidates, const Grid<double>& grid, std::size_t n) {
  json stages = json::array();
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    json row = json::array();
    for (double v : grid.row(i)) row.push_back(v);
    stages.push_back(std::move(row));
  }
  return json{{"candidates", candidates}, {"stages", std::move(stages)}, {"n", n}};
}

inline json score_table_to_json(const ScoreTable& st) {
  json j = grid_to_json(st.candidates, st.scores, st.n);
  json order = json::array();
  for (auto c : st.column_order) order.push_back(st.candidates[c]);
  j["columnOrder"] = std::move(order);
  return j;
}

inline json tally_to_json(const TallySet& t) {
  return json{{"counts", grid_to_json(t.counts.candidates, t.counts.counts, t.counts.n)},
              {"processed", grid_to_json(t.processed.candidates, t.processed.cumulative, t.processed.n)},
              {"scores", score_table_to_json(t.scores)}};
}

// ---------------------------------------------------------------------------
// Decisions

namespace detail {
inline json opt_stage(std::optional<std::size_t> s) { return s ? json(*s) : json(nullptr); }
inline json cutoff(std::size_t s) { return s ? json(s) : json(nullptr); }
inline std::string text_of(const json& j) {
  if (j.is_null()) return "none";
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_float()) return stagevote::detail::format_number(j.get<double>());
  return j.dump();
}
}  // namespace detail

/// Key/value view of a decision. Stage numbers are 1-based; absent stages
/// (no winning stage, a cut-off that admits no stage) are null.
inline json decision_to_json(const Decision& d) {
  json j;
  if (d.algorithm == Decision::Algorithm::basic) {
    j["algorithm"] = "basic";
    j["winner"] = d.winner;
    j["stage"] = detail::opt_stage(d.stage);
    j["score"] = d.score ? json(*d.score) : json(nullptr);
    j["alpha"] = d.config.alpha;
    j["fallback"] = d.fallback;
    return j;
  }
  j["algorithm"] = "BetaGamma";
  j["NULLCandidate"] = d.null_id;
  j["winner"] = d.winner;
  j["bestScore"] = d.score ? json(*d.score) : json(nullptr);
  j["bestScoreStage"] = detail::opt_stage(d.stage);
  j["selectedStage"] = detail::opt_stage(d.selected_stage);
  j["lastStageByBeta"] = detail::cutoff(d.window.last_by_beta);
  j["lastStageByGamma"] = detail::cutoff(d.window.last_by_gamma);
  j["firstStageByAlpha"] = detail::opt_stage(d.window.first_by_alpha);
  j["alpha"] = d.config.alpha;
  j["beta"] = d.config.beta ? json(*d.config.beta) : json(nullptr);
  j["gamma"] = d.config.gamma.to_string();
  j["selector"] = std::string(to_string(d.config.selector));
  j["betaMode"] = std::string(to_string(d.config.beta_mode));
  json pool = json::array();
  for (auto s : d.window.pool()) pool.push_back(s);
  j["pool"] = std::move(pool);
  json diag = json::array();
  for (const auto& s : d.diagnostics) diag.push_back({{"stage", s.stage}, {"entropy", s.entropy}, {"variance", s.variance}});
  j["diagnostics"] = std::move(diag);
  return j;
}

// One "key: value" line per scalar field of decision_to_json.
inline std::string format_decision(const Decision& d) {
  std::ostringstream out;
  const json fields = decision_to_json(d);
  for (const auto& [key, value] : fields.items()) {
    if (value.is_array()) continue;
    out << key << ": " << detail::text_of(value) << '\n';
  }
  if (!d.diagnostics.empty()) {
    out << "pool:";
    for (auto s : d.window.pool()) out << ' ' << s;
    out << '\n';
    for (const auto& s : d.diagnostics) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  stage %zu: entropy %.6f, variance %.6f\n", s.stage, s.entropy, s.variance);
      out << buf;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Simulation metrics

inline std::string format_metrics(const sim::MetricsTable& mt) {
  const std::array<std::string, 3> headers{"meanWinnerRank", "rateTrueWinners", "rateWinner<NULL"};
  std::size_t name_w = std::max(display_width("Metrics"), display_width("Algorithms"));
  for (const auto& r : mt.rows) name_w = std::max(name_w, display_width(r.method));

  auto fixed3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "========= SIMULATION RESULTS ========\n";
  out << pad_right("Metrics", name_w);
  for (const auto& h : headers) out << "  " << h;
  out << '\n' << "Algorithms" << '\n';
  for (const auto& r : mt.rows) {
    out << pad_right(r.method, name_w);
    const std::array<double, 3> vals{r.mean_winner_rank, r.rate_true_winners, r.rate_winner_below_null};
    for (std::size_t i = 0; i < 3; ++i) out << "  " << pad_left(fixed3(vals[i]), headers[i].size());
    out << '\n';
  }

  if (!mt.validation_mse.empty()) {
    std::size_t w = display_width("Metrics");
    for (const auto& [name, _] : mt.validation_mse) w = std::max(w, display_width(name));
    const std::string head = "val_MeanSquaredErr";
    std::vector<std::string> vals;
    std::size_t vw = head.size();
    for (const auto& [_, v] : mt.validation_mse) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      vals.emplace_back(buf);
      vw = std::max(vw, vals.back().size());
    }
    out << '\n' << pad_right("Metrics", w) << "  " << pad_left(head, vw) << '\n' << "Algorithms" << '\n';
    for (std::size_t i = 0; i < vals.size(); ++i)
      out << pad_right(mt.validation_mse[i].first, w) << "  " << pad_left(vals[i], vw) << '\n';
  }
  return out.str();
}

inline json metrics_to_json(const sim::MetricsTable& mt) {
  json rows = json::array();
  for (const auto& r : mt.rows)
    rows.push_back({{"algorithm", r.method},
                    {"meanWinnerRank", r.mean_winner_rank},
                    {"rateTrueWinners", r.rate_true_winners},
                    {"rateWinner<NULL", r.rate_winner_below_null}});
  json mse = json::object();
  for (const auto& [name, v] : mt.validation_mse) mse[name] = v;
  return json{{"results", std::move(rows)}, {"val_MeanSquaredErr", std::move(mse)}};
}

}  // namespace stagevote::report
