#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "support.hpp"

using namespace stagevote;
namespace t = stagevote::testing;

namespace {

std::vector<Ballot> repeat(std::size_t n, std::vector<std::string> prefs, const std::string& tag) {
  std::vector<Ballot> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({tag + std::to_string(i), prefs});
  return out;
}

template <class... Groups>
std::vector<Ballot> concat(Groups... groups) {
  std::vector<Ballot> out;
  (out.insert(out.end(), groups.begin(), groups.end()), ...);
  return out;
}

struct NoisyGuess {
  double sigma = 0.0;
  std::uint64_t key = 0;
  double predict(double truth) const { return truth + sigma * sim::keyed_normal(key, std::bit_cast<std::uint64_t>(truth)); }
};

}  // namespace

TEST(Fptp, PluralityOfFirstPreferences) {
  const auto r = fptp_winner(concat(repeat(3, {"A", "B"}, "a"), repeat(2, {"B", "A"}, "b")), t::abc_roster());
  EXPECT_EQ(r.winner, "A");
  EXPECT_FALSE(r.tie);
  EXPECT_EQ(r.first_preferences, (std::vector<std::size_t>{3, 2, 0, 0}));
}

TEST(Fptp, SecondChoiceProfileTiesToRosterOrder) {
  const auto r = fptp_winner(t::second_choice_ballots(), t::second_choice_roster());
  EXPECT_EQ(r.winner, "A");
  EXPECT_TRUE(r.tie);
}

TEST(Fptp, SingleBallotAndNullTies) {
  EXPECT_EQ(fptp_winner({{"v", {"C", "A"}}}, t::abc_roster()).winner, "C");
  const auto roster = t::roster_of({"NULL", "A"});
  EXPECT_EQ(fptp_winner(concat(repeat(1, {"NULL"}, "n"), repeat(1, {"A"}, "a")), roster).winner, "A");
  EXPECT_THROW(fptp_winner({}, t::abc_roster()), DegenerateError);
}

TEST(Irv, MajorityWinsInFirstRound) {
  const auto r = irv_winner(concat(repeat(3, {"B", "A"}, "b"), repeat(2, {"A", "B"}, "a")), t::abc_roster());
  EXPECT_EQ(r.winner, "B");
  EXPECT_EQ(r.rounds, 1u);
}

TEST(Irv, TransfersAfterElimination) {
  const auto ballots = concat(repeat(4, {"A"}, "a"), repeat(3, {"B", "C"}, "b"), repeat(2, {"C", "B"}, "c"));
  const auto r = irv_winner(ballots, t::abc_roster());
  EXPECT_EQ(r.winner, "B");
  ASSERT_GE(r.eliminated.size(), 2u);
  EXPECT_EQ(r.eliminated[0], "NULL");
  EXPECT_EQ(r.eliminated[1], "C");
}

TEST(Irv, UnanimityAndMajorityCriterion) {
  EXPECT_EQ(irv_winner(repeat(5, {"C", "A", "B"}, "v"), t::abc_roster()).winner, "C");
  std::mt19937_64 rng(31);
  const auto roster = t::roster_of({"A", "B", "C", "D", "NULL"});
  for (int trial = 0; trial < 200; ++trial) {
    auto ballots = t::random_ballots(rng, roster, 21, 1, 5);
    // Give B a strict majority of first preferences.
    for (std::size_t i = 0; i < 11; ++i) {
      std::erase(ballots[i].prefs, std::string("B"));
      ballots[i].prefs.insert(ballots[i].prefs.begin(), "B");
    }
    EXPECT_EQ(irv_winner(ballots, roster).winner, "B");
  }
}

TEST(Irv, ExhaustedBallotsLeaveTheCount) {
  // After C goes, its ballots are exhausted: A 3 vs B 2 of 5 active.
  const auto ballots = concat(repeat(3, {"A"}, "a"), repeat(2, {"B"}, "b"), repeat(1, {"C"}, "c"));
  const auto r = irv_winner(ballots, t::abc_roster());
  EXPECT_EQ(r.winner, "A");
}

TEST(Crowd, SingleVoterRankingFollowsPredictions) {
  PredictionMatrix pm{{"x", "y", "z"}, Grid<double>(1, 3)};
  pm.values(0, 0) = 1.0;
  pm.values(0, 1) = 3.0;
  pm.values(0, 2) = 2.0;
  EXPECT_EQ(crowd_mean_ranking(pm), (std::vector<std::string>{"y", "z", "x"}));
  EXPECT_EQ(crowd_median_ranking(pm), (std::vector<std::string>{"y", "z", "x"}));
}

TEST(Crowd, SymmetricErrorsCancelInTheMean) {
  const std::vector<double> truth{10.0, 30.0, 20.0, 25.0};
  PredictionMatrix pm{{"a", "b", "c", "d"}, Grid<double>(2, 4)};
  const std::vector<double> eps{15.0, -12.0, 9.0, -8.0};
  for (std::size_t c = 0; c < 4; ++c) {
    pm.values(0, c) = truth[c] + eps[c];
    pm.values(1, c) = truth[c] - eps[c];
  }
  EXPECT_EQ(crowd_mean_ranking(pm), (std::vector<std::string>{"b", "d", "c", "a"}));
}

TEST(Crowd, ConstantColumnsKeepSlateOrder) {
  PredictionMatrix pm{{"p", "q", "r"}, Grid<double>(3, 3, 4.0)};
  EXPECT_EQ(crowd_mean_ranking(pm), (std::vector<std::string>{"p", "q", "r"}));
  EXPECT_EQ(crowd_median_ranking(pm), (std::vector<std::string>{"p", "q", "r"}));
}

TEST(Crowd, MedianOfEvenCrowdAveragesMiddlePair) {
  PredictionMatrix pm{{"a"}, Grid<double>(4, 1)};
  pm.values(0, 0) = 1;
  pm.values(1, 0) = 10;
  pm.values(2, 0) = 4;
  pm.values(3, 0) = 2;
  EXPECT_DOUBLE_EQ(crowd_medians(pm)[0], 3.0);
}

TEST(Crowd, MeanRankingIgnoresPerVoterShift) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    PredictionMatrix pm{{"a", "b", "c", "d", "e"}, Grid<double>(7, 5)};
    for (std::size_t v = 0; v < 7; ++v)
      for (std::size_t c = 0; c < 5; ++c) pm.values(v, c) = std::round(n(rng));
    auto shifted = pm;
    const std::size_t who = rng() % 7;
    for (std::size_t c = 0; c < 5; ++c) shifted.values(who, c) += 64.0;  // exact in binary
    EXPECT_EQ(crowd_mean_ranking(pm), crowd_mean_ranking(shifted));
  }
}

TEST(Crowd, EmptyMatrixIsRejected) {
  EXPECT_THROW(crowd_means(PredictionMatrix{{}, Grid<double>()}), DegenerateError);
}

TEST(BestVoter, SingletonAndPerfectVoter) {
  const std::vector<double> items{1, 2, 3, 4}, truth{1, 2, 3, 4};
  const std::vector<NoisyGuess> one{{3.0, 1}};
  EXPECT_EQ((best_voter<double, NoisyGuess>(one, items, truth)), 0u);
  const std::vector<NoisyGuess> crowd{{3.0, 1}, {2.0, 2}, {0.0, 3}, {1.0, 4}};
  EXPECT_EQ((best_voter<double, NoisyGuess>(crowd, items, truth)), 2u);
}

TEST(BestVoter, LowerNoiseIsSelectedAcrossSeeds) {
  std::vector<double> items;
  for (int i = 0; i < 50; ++i) items.push_back(0.5 + i);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<NoisyGuess> crowd{{2.0, 2 * seed + 1}, {1.0, 2 * seed + 2}};
    hits += best_voter<double, NoisyGuess>(crowd, items, items) == 1 ? 1 : 0;
  }
  EXPECT_GE(hits, 95);
}
