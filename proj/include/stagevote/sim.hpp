#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "stagevote/ballot.hpp"
#include "stagevote/baselines.hpp"
#include "stagevote/errors.hpp"
#include "stagevote/select.hpp"
#include "stagevote/tally.hpp"

// Seeded Monte-Carlo election study. A synthetic candidate pool is scored by
// a linear "true quality"; voters are noisy affine estimators that cannot see
// some features; every election draws a slate from the held-out split, builds
// ranked ballots from the voters' predictions and scores each voting method by
// the true rank of its winner.

namespace stagevote::sim {

inline constexpr std::size_t kFeatures = 10;

// ---------------------------------------------------------------------------
// Random streams

// Independent engine for (master seed, purpose tag, index). Parallel and
// serial runs therefore draw identical numbers for the same index.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t tag, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Standard normal that is a pure function of (key, item): a voter's error on
// a given candidate is fixed, like a trained model's.
inline double keyed_normal(std::uint64_t key, std::uint64_t item) {
  const std::uint64_t a = splitmix64(key ^ splitmix64(item));
  const std::uint64_t b = splitmix64(a);
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// ---------------------------------------------------------------------------
// Dataset

struct CandidateRecord {
  std::size_t id = 0;
  std::array<double, kFeatures> features{};
  double y = 0.0;  // true quality; higher is better
};

struct DatasetOptions {
  std::size_t size = 3000;
  double test_fraction = 0.3;
  double validation_fraction = 0.2;  // share of the training split kept for validation
};

struct Dataset {
  std::array<double, kFeatures> weights{};
  std::vector<CandidateRecord> candidates;
  std::vector<std::size_t> fit;         // training rows used to fit voters
  std::vector<std::size_t> validation;  // training rows used to measure voter MSE
  std::vector<std::size_t> test;        // slates are drawn from here only
  double null_y = 0.0;                  // median true quality, the NULL candidate's value

  std::vector<std::size_t> train() const {
    auto t = fit;
    t.insert(t.end(), validation.begin(), validation.end());
    return t;
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw DegenerateError("median of an empty list");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

/// Features uniform in [5,10), one shared weight vector uniform in [-10,10),
/// y the weighted sum. Rows are i.i.d., so the split is positional.
inline Dataset generate_dataset(std::uint64_t seed, DatasetOptions opts = {}) {
  if (opts.size < 10) throw ConfigError("dataset size must be at least 10");
  if (!(opts.test_fraction > 0.0 && opts.test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0,1)");
  auto rng = make_engine(seed, 0xDA7A);
  std::uniform_real_distribution<double> feature(5.0, 10.0);
  std::uniform_real_distribution<double> weight(-10.0, 10.0);

  Dataset ds;
  for (auto& w : ds.weights) w = weight(rng);
  ds.candidates.resize(opts.size);
  std::vector<double> ys;
  ys.reserve(opts.size);
  for (std::size_t i = 0; i < opts.size; ++i) {
    auto& c = ds.candidates[i];
    c.id = i;
    double y = 0.0;
    for (std::size_t f = 0; f < kFeatures; ++f) {
      c.features[f] = feature(rng);
      y += ds.weights[f] * c.features[f];
    }
    c.y = y;
    ys.push_back(y);
  }
  ds.null_y = median(ys);

  const auto n_test = static_cast<std::size_t>(std::llround(opts.test_fraction * static_cast<double>(opts.size)));
  const std::size_t n_train = opts.size - n_test;
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(opts.validation_fraction * static_cast<double>(n_train))));
  for (std::size_t i = 0; i < opts.size; ++i) {
    if (i < n_train - n_val)
      ds.fit.push_back(i);
    else if (i < n_train)
      ds.validation.push_back(i);
    else
      ds.test.push_back(i);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Voters

/// Affine least-squares estimator over the features this voter can see, plus
/// a fixed per-candidate Gaussian error scaled to hit a target validation MSE.
struct Voter {
  std::array<bool, kFeatures> blind{};  // true = hidden from this voter
  std::vector<double> coef;             // intercept first, then one per visible feature
  double noise_sd = 0.0;
  std::uint64_t noise_key = 0;
  double target_mse = 0.0;
  double noise_free_mse = 0.0;  // validation MSE with noise_sd = 0
  double achieved_mse = 0.0;
  bool clamped = false;  // target was below noise_free_mse

  std::size_t blindness() const { return static_cast<std::size_t>(std::count(blind.begin(), blind.end(), true)); }

  double predict_clean(const CandidateRecord& c) const {
    double v = coef.at(0);
    std::size_t j = 1;
    for (std::size_t f = 0; f < kFeatures; ++f)
      if (!blind[f]) v += coef[j++] * c.features[f];
    return v;
  }
  double noise(const CandidateRecord& c) const { return keyed_normal(noise_key, c.id); }
  double predict(const CandidateRecord& c) const { return predict_clean(c) + noise_sd * noise(c); }
};

/// Fits the affine estimator for a given blind mask on `rows`.
inline std::vector<double> fit_affine(const Dataset& ds, std::span<const std::size_t> rows,
                                      const std::array<bool, kFeatures>& blind) {
  std::vector<std::size_t> visible;
  for (std::size_t f = 0; f < kFeatures; ++f)
    if (!blind[f]) visible.push_back(f);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(visible.size() + 1));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& c = ds.candidates[rows[r]];
    const auto ri = static_cast<Eigen::Index>(r);
    x(ri, 0) = 1.0;
    for (std::size_t j = 0; j < visible.size(); ++j) x(ri, static_cast<Eigen::Index>(j + 1)) = c.features[visible[j]];
    y(ri) = c.y;
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  return {beta.data(), beta.data() + beta.size()};
}

/// Chooses the noise scale so that the validation MSE equals `target`.
/// MSE(s) = C + 2 B s + A s^2 over the validation rows, with residuals r_j of
/// the clean estimator and fixed noise draws z_j; we take the root s >= 0.
inline void calibrate_noise(Voter& v, const Dataset& ds, double target) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (auto row : ds.validation) {
    const auto& cand = ds.candidates[row];
    const double r = v.predict_clean(cand) - cand.y;
    const double z = v.noise(cand);
    a += z * z;
    b += r * z;
    c += r * r;
  }
  const double m = static_cast<double>(ds.validation.size());
  a /= m;
  b /= m;
  c /= m;
  v.target_mse = target;
  v.noise_free_mse = c;
  if (target <= c) {
    v.noise_sd = 0.0;
    v.clamped = target < c;
  } else {
    v.noise_sd = (-b + std::sqrt(b * b + a * (target - c))) / a;
  }
  double se = 0.0;
  for (auto row : ds.validation) {
    const double e = v.predict(ds.candidates[row]) - ds.candidates[row].y;
    se += e * e;
  }
  v.achieved_mse = se / m;
}

struct BlindnessRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  friend bool operator==(const BlindnessRange&, const BlindnessRange&) = default;
};

struct CrowdQuality {
  std::string name = "standardDistribution";
  double mean = 0.0;
  double sd = 0.0;
  double floor = 1e-6;  // targets drawn below this are raised to it
  friend bool operator==(const CrowdQuality&, const CrowdQuality&) = default;
};

inline std::vector<Voter> build_crowd(std::size_t voters, BlindnessRange blindness, const CrowdQuality& quality,
                                      const Dataset& ds, std::uint64_t seed) {
  if (blindness.lo > blindness.hi || blindness.hi > kFeatures)
    throw ConfigError("columnBlindness must lie in [0, " + std::to_string(kFeatures) + "]");
  if (!(quality.mean > 0.0) || quality.sd < 0.0) throw ConfigError("crowd quality needs mean > 0 and sd >= 0");
  if (ds.validation.empty() || ds.fit.empty()) throw ConfigError("dataset has no training rows");

  std::vector<Voter> crowd(voters);
  for (std::size_t i = 0; i < voters; ++i) {
    auto rng = make_engine(seed, 0xC0D, i);
    std::normal_distribution<double> target_dist(quality.mean, quality.sd);
    std::uniform_int_distribution<std::size_t> size_dist(blindness.lo, blindness.hi);
    Voter& v = crowd[i];
    const double target = std::max(quality.floor, quality.sd > 0.0 ? target_dist(rng) : quality.mean);
    std::array<std::size_t, kFeatures> perm{};
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t hidden = size_dist(rng);
    for (std::size_t f = 0; f < hidden; ++f) v.blind[perm[f]] = true;
    v.noise_key = rng();
    v.coef = fit_affine(ds, ds.fit, v.blind);
    calibrate_noise(v, ds, target);
  }
  return crowd;
}

// ---------------------------------------------------------------------------
// Elections

inline std::string candidate_id(const CandidateRecord& c) { return "c" + std::to_string(c.id); }

/// Ranks the slate plus NULL by predicted quality (NULL is predicted at
/// null_y by every voter), best first, truncated to num_prefs.
inline Ballot cast_ballot(const Voter& v, std::span<const CandidateRecord> slate, double null_y,
                          std::size_t num_prefs, std::string voter_id = {}) {
  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(slate.size() + 1);
  for (const auto& c : slate) scored.emplace_back(v.predict(c), candidate_id(c));
  scored.emplace_back(null_y, std::string(kNullToken));
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  Ballot b{std::move(voter_id), {}};
  for (std::size_t i = 0; i < scored.size() && i < num_prefs; ++i) b.prefs.push_back(scored[i].second);
  return b;
}

struct SimConfig {
  std::size_t num_candidates = 10;
  std::size_t num_voters = 100;
  std::size_t num_elections = 100;
  BlindnessRange blindness{5, 5};
  CrowdQuality quality{"standardDistribution", 600.0, 100.0};
  std::uint64_t seed = 0;
  std::string dataset_name = "mySynthetic";
  std::string predicted_feature = "y";
  std::optional<std::size_t> num_prefs;  // default: slate size (k - 1 with NULL)
  DatasetOptions dataset;
  std::vector<SelectionConfig> algorithms;  // BetaGamma variants
  std::vector<double> basic_alphas;         // basic-rule variants
  bool fptp = true;
  bool irv = true;
  bool crowd_mean = true;
  bool crowd_median = true;
  bool best_voter = true;
  std::size_t threads = 1;
  // Accepted for header compatibility with neural-network voters; unused.
  std::optional<long long> epochs;
  std::optional<long long> trainable_layers;

  std::size_t ballot_length() const { return num_prefs.value_or(num_candidates); }

  void validate() const {
    if (num_candidates < 1) throw ConfigError("numCandidates must be positive");
    if (num_voters < 1) throw ConfigError("numVoters must be positive");
    if (num_elections < 1) throw ConfigError("numElections must be positive");
    if (blindness.lo > blindness.hi || blindness.hi > kFeatures)
      throw ConfigError("columnBlindness must lie in [0, " + std::to_string(kFeatures) + "]");
    if (!(quality.mean > 0.0)) throw ConfigError("crowdBuildMethod.mean must be positive");
    if (quality.sd < 0.0) throw ConfigError("crowdBuildMethod.standardDeviation must be non-negative");
    const auto n_test = static_cast<std::size_t>(
        std::llround(dataset.test_fraction * static_cast<double>(dataset.size)));
    if (num_candidates > n_test) throw ConfigError("numCandidates exceeds the test split size");
    if (const auto p = ballot_length(); p < 1 || p > num_candidates + 1)
      throw ConfigError("numPreferences must lie in [1, numCandidates + 1]");
    for (const auto& a : algorithms) a.validate();
    for (double a : basic_alphas)
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("basic alpha must lie in [0,1]");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

// The variant grid used by default: alpha x beta x gamma x selector, skipping
// gamma caps at or below alpha.
inline std::vector<SelectionConfig> default_algorithm_grid() {
  std::vector<SelectionConfig> grid;
  const std::array<Selector, 6> selectors{Selector::First,      Selector::Last,        Selector::MinEntropy,
                                          Selector::MaxEntropy, Selector::MinVariance, Selector::MaxVariance};
  for (double alpha : {0.5, 0.66, 0.8})
    for (std::optional<double> beta : {std::optional<double>{}, std::optional<double>{0.33}})
      for (std::optional<double> gamma : {std::optional<double>{}, std::optional<double>{0.66},
                                          std::optional<double>{0.8}}) {
        if (gamma && *gamma <= alpha) continue;
        for (Selector s : selectors) {
          SelectionConfig c;
          c.alpha = alpha;
          c.beta = beta;
          c.gamma = gamma ? GammaRule::any(*gamma) : GammaRule::none();
          c.selector = s;
          grid.push_back(c);
        }
      }
  return grid;
}

inline SimConfig with_default_algorithms(SimConfig cfg) {
  if (cfg.algorithms.empty()) cfg.algorithms = default_algorithm_grid();
  if (cfg.basic_alphas.empty()) cfg.basic_alphas = {0.5};
  return cfg;
}

inline constexpr std::string_view kCrowdMean = "crowd-Mean";
inline constexpr std::string_view kCrowdMedian = "crowd-Median";
inline constexpr std::string_view kBestVoter = "bestVoter (Dictatorship)";
inline constexpr std::string_view kIrv = "InstantRunoffVoting";
inline constexpr std::string_view kFptp = "FirstPastThePost (but without tactical voting)";

inline std::string basic_label(double alpha) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "MyVoteSys basic <α=%.2f>", alpha);
  return buf;
}

// Labels of every method a config evaluates, in evaluation order.
inline std::vector<std::string> method_labels(const SimConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.crowd_mean) out.emplace_back(kCrowdMean);
  if (cfg.crowd_median) out.emplace_back(kCrowdMedian);
  for (const auto& a : cfg.algorithms) out.push_back(a.label());
  for (double a : cfg.basic_alphas) out.push_back(basic_label(a));
  if (cfg.irv) out.emplace_back(kIrv);
  if (cfg.fptp) out.emplace_back(kFptp);
  if (cfg.best_voter) out.emplace_back(kBestVoter);
  return out;
}

struct MethodOutcome {
  std::string winner;    // candidate id, or NULL
  std::size_t true_rank = 0;  // 1 = best candidate on the slate
  bool below_null = false;
};

struct ElectionRecord {
  std::vector<std::size_t> slate;     // dataset row ids
  std::vector<MethodOutcome> outcomes;  // aligned with method_labels
};

/// Everything that stays fixed across the elections of one simulation.
struct Electorate {
  Dataset dataset;
  std::vector<Voter> crowd;
  std::size_t best_voter = 0;
};

inline std::size_t true_rank_of(double y, std::span<const CandidateRecord> slate) {
  return 1 + static_cast<std::size_t>(
                 std::count_if(slate.begin(), slate.end(), [y](const CandidateRecord& c) { return c.y > y; }));
}

/// Runs one election on a fixed slate: ballots are built once and every
/// configured method is evaluated on the same ballots / predictions.
inline ElectionRecord run_election(const Electorate& el, std::span<const CandidateRecord> slate,
                                   const SimConfig& cfg) {
  const auto& crowd = el.crowd;
  const double null_y = el.dataset.null_y;

  std::vector<std::string> ids;
  for (const auto& c : slate) ids.push_back(candidate_id(c));
  ids.emplace_back(kNullToken);
  const CandidateRoster roster(ids, std::string(kNullToken));
  const std::size_t num_prefs = std::min(cfg.ballot_length(), roster.size());

  std::vector<Ballot> ballots;
  ballots.reserve(crowd.size());
  for (std::size_t v = 0; v < crowd.size(); ++v) ballots.push_back(cast_ballot(crowd[v], slate, null_y, num_prefs));

  ElectionRecord rec;
  for (const auto& c : slate) rec.slate.push_back(c.id);
  auto outcome = [&](const std::string& winner) {
    MethodOutcome o;
    o.winner = winner;
    if (winner == kNullToken) {
      o.true_rank = true_rank_of(null_y, slate);
    } else {
      const auto idx = *roster.index_of(winner);
      o.true_rank = true_rank_of(slate[idx].y, slate);
      o.below_null = slate[idx].y < null_y;
    }
    rec.outcomes.push_back(std::move(o));
  };

  if (cfg.crowd_mean || cfg.crowd_median) {
    PredictionMatrix pm{ids, Grid<double>(crowd.size(), ids.size())};
    for (std::size_t v = 0; v < crowd.size(); ++v) {
      for (std::size_t c = 0; c < slate.size(); ++c) pm.values(v, c) = crowd[v].predict(slate[c]);
      pm.values(v, slate.size()) = null_y;
    }
    if (cfg.crowd_mean) outcome(crowd_mean_ranking(pm).front());
    if (cfg.crowd_median) outcome(crowd_median_ranking(pm).front());
  }

  const TallySet t = tally(ballots, roster, num_prefs);
  for (const auto& a : cfg.algorithms) outcome(beta_gamma_winner(t.scores, a, kNullToken).winner);
  for (double a : cfg.basic_alphas) outcome(basic_winner(t.scores, a, kNullToken).winner);
  if (cfg.irv) outcome(irv_winner(ballots, roster).winner);
  if (cfg.fptp) outcome(fptp_winner(ballots, roster).winner);
  if (cfg.best_voter) outcome(ballots[el.best_voter].prefs.front());
  return rec;
}

// Slate of `count` distinct test rows for election `index`.
inline std::vector<CandidateRecord> draw_slate(const Dataset& ds, std::size_t count, std::uint64_t seed,
                                               std::size_t index) {
  auto rng = make_engine(seed, 0x5A7E, index);
  std::vector<std::size_t> pool = ds.test;
  std::vector<CandidateRecord> slate;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    slate.push_back(ds.candidates[pool[i]]);
  }
  return slate;
}

struct MetricsRow {
  std::string method;
  double mean_winner_rank = 0.0;
  double rate_true_winners = 0.0;
  double rate_winner_below_null = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;  // ascending meanWinnerRank
  std::vector<std::pair<std::string, double>> validation_mse;
};

/// Aggregates the per-election log; rows are stably sorted by meanWinnerRank.
inline MetricsTable aggregate(const std::vector<std::string>& labels, const std::vector<ElectionRecord>& log) {
  MetricsTable mt;
  const double n = static_cast<double>(log.size());
  for (std::size_t m = 0; m < labels.size(); ++m) {
    MetricsRow row{labels[m]};
    for (const auto& rec : log) {
      const auto& o = rec.outcomes.at(m);
      row.mean_winner_rank += static_cast<double>(o.true_rank);
      row.rate_true_winners += o.true_rank == 1 ? 1.0 : 0.0;
      row.rate_winner_below_null += o.below_null ? 1.0 : 0.0;
    }
    if (n > 0) {
      row.mean_winner_rank /= n;
      row.rate_true_winners /= n;
      row.rate_winner_below_null /= n;
    }
    mt.rows.push_back(std::move(row));
  }
  std::stable_sort(mt.rows.begin(), mt.rows.end(),
                   [](const MetricsRow& a, const MetricsRow& b) { return a.mean_winner_rank < b.mean_winner_rank; });
  return mt;
}

inline Electorate build_electorate(const SimConfig& cfg) {
  Electorate el;
  el.dataset = generate_dataset(cfg.seed, cfg.dataset);
  el.crowd = build_crowd(cfg.num_voters, cfg.blindness, cfg.quality, el.dataset, cfg.seed);
  std::vector<CandidateRecord> items;
  std::vector<double> truth;
  for (auto row : el.dataset.validation) {
    items.push_back(el.dataset.candidates[row]);
    truth.push_back(el.dataset.candidates[row].y);
  }
  el.best_voter = best_voter<CandidateRecord, Voter>(el.crowd, items, truth);
  return el;
}

// Validation MSE of the crowd-mean / crowd-median predictors and of the best voter.
inline std::vector<std::pair<std::string, double>> validation_errors(const Electorate& el, const SimConfig& cfg) {
  const auto& ds = el.dataset;
  PredictionMatrix pm{{}, Grid<double>(el.crowd.size(), ds.validation.size())};
  for (auto row : ds.validation) pm.slate.push_back(candidate_id(ds.candidates[row]));
  for (std::size_t v = 0; v < el.crowd.size(); ++v)
    for (std::size_t j = 0; j < ds.validation.size(); ++j)
      pm.values(v, j) = el.crowd[v].predict(ds.candidates[ds.validation[j]]);
  auto mse = [&](const std::vector<double>& pred) {
    double se = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double e = pred[j] - ds.candidates[ds.validation[j]].y;
      se += e * e;
    }
    return se / static_cast<double>(pred.size());
  };
  std::vector<std::pair<std::string, double>> out;
  if (cfg.crowd_mean) out.emplace_back(kCrowdMean, mse(crowd_means(pm)));
  if (cfg.crowd_median) out.emplace_back(kCrowdMedian, mse(crowd_medians(pm)));
  if (cfg.best_voter) out.emplace_back(kBestVoter, el.crowd[el.best_voter].achieved_mse);
  return out;
}

struct SimulationResult {
  SimConfig config;  // with defaults filled in
  std::vector<std::string> labels;
  std::vector<ElectionRecord> log;
  MetricsTable metrics;
  std::size_t clamped_voters = 0;  // voters whose target MSE was unattainable
};

/// Runs the whole study. Deterministic in the config: the electorate is built
/// once, and each election draws from its own (seed, index) stream, so the
/// thread count does not affect the result.
inline SimulationResult run_simulation(SimConfig cfg) {
  cfg = with_default_algorithms(std::move(cfg));
  cfg.validate();

  SimulationResult res;
  const Electorate el = build_electorate(cfg);
  res.labels = method_labels(cfg);
  res.log.resize(cfg.num_elections);

  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&](std::size_t first, std::size_t stride) {
    try {
      for (std::size_t e = first; e < cfg.num_elections; e += stride) {
        const auto slate = draw_slate(el.dataset, cfg.num_candidates, cfg.seed, e);
        res.log[e] = run_election(el, slate, cfg);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const std::size_t threads = std::min(cfg.threads, cfg.num_elections);
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  if (failure) std::rethrow_exception(failure);

  res.metrics = aggregate(res.labels, res.log);
  res.metrics.validation_mse = validation_errors(el, cfg);
  res.clamped_voters =
      static_cast<std::size_t>(std::count_if(el.crowd.begin(), el.crowd.end(), [](const Voter& v) { return v.clamped; }));
  res.config = std::move(cfg);
  return res;
}

}  // namespace stagevote::sim
