#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace stagevote;
using stagevote::testing::roster_of;

namespace {

BallotFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ballots(in);
}

}  // namespace

TEST(Roster, ExcludesIdkFromTalliedColumns) {
  CandidateRoster r({"A", "B", "NULL", "IDK"}, "NULL", std::string("IDK"));
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(r.null_index(), 2u);
  EXPECT_TRUE(r.is_idk("IDK"));
  EXPECT_TRUE(r.contains("IDK"));
  EXPECT_FALSE(r.index_of("IDK").has_value());
  EXPECT_EQ(default_num_prefs(r), 2u);
}

TEST(Roster, RejectsMissingNullAndDuplicates) {
  EXPECT_THROW(CandidateRoster({"A", "B"}, "NULL"), ConfigError);
  EXPECT_THROW(CandidateRoster({"A", "A", "NULL"}, "NULL"), ConfigError);
}

TEST(ParseBallots, ReadsHeaderAndTruncatedRows) {
  auto f = parse("voter_id,pref1,pref2,pref3\nv1,A,B,NULL\nv2,B\nv3,\"C\",A,\n");
  EXPECT_EQ(f.pref_columns, 3u);
  ASSERT_EQ(f.ballots.size(), 3u);
  EXPECT_EQ(f.ballots[1].prefs, (std::vector<std::string>{"B"}));
  EXPECT_EQ(f.ballots[2].prefs, (std::vector<std::string>{"C", "A"}));
  EXPECT_EQ(f.ballots[2].line, 4u);
}

TEST(ParseBallots, AllEmptyRowIsAnEmptyBallot) {
  auto f = parse("voter_id,pref1,pref2,pref3,pref4,pref5,pref6\nv1,D,B,NULL,C,E,A\nv2,\n");
  ASSERT_EQ(f.ballots.size(), 2u);
  EXPECT_EQ(f.ballots[0].prefs, (std::vector<std::string>{"D", "B", "NULL", "C", "E", "A"}));
  EXPECT_TRUE(f.ballots[1].prefs.empty());
}

TEST(ParseBallots, ToleratesBomCrlfAndBlankLines) {
  auto f = parse("\xEF\xBB\xBFvoter_id,pref1,pref2\r\n\r\nv1,A,B\r\n\nv2,B,A\r\n");
  ASSERT_EQ(f.ballots.size(), 2u);
  EXPECT_EQ(f.ballots[0].prefs, (std::vector<std::string>{"A", "B"}));
}

TEST(ParseBallots, RejectsMalformedInput) {
  EXPECT_THROW(parse("id,pref1\nv1,A\n"), FormatError);
  EXPECT_THROW(parse("voter_id,pref2\nv1,A\n"), FormatError);
  EXPECT_THROW(parse("voter_id,pref1\nv1,A,B\n"), ParseError);
  EXPECT_THROW(parse("voter_id,pref1,pref2\nv1,,B\n"), ParseError);
  EXPECT_THROW(parse("voter_id,pref1\nv1,\"A\n"), ParseError);
  try {
    parse("voter_id,pref1,pref2\nv1,A,B\nv2,,B\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ValidateBallot, FlagsDuplicateAndUnknownStamps) {
  auto roster = roster_of({"A", "B", "NULL"});
  auto dup = validate_ballot({"v1", {"A", "B", "A"}, 2}, roster);
  ASSERT_TRUE(std::holds_alternative<BallotRejection>(dup));
  const auto& rej = std::get<BallotRejection>(dup);
  EXPECT_EQ(rej.kind, BallotRejection::Kind::DuplicateCandidate);
  EXPECT_EQ(rej.candidate, "A");
  EXPECT_NE(rej.message().find("v1"), std::string::npos);

  auto unknown = validate_ballot({"v2", {"A", "Z"}, 3}, roster);
  ASSERT_TRUE(std::holds_alternative<BallotRejection>(unknown));
  EXPECT_EQ(std::get<BallotRejection>(unknown).kind, BallotRejection::Kind::UnknownCandidate);

  EXPECT_TRUE(std::holds_alternative<Ballot>(validate_ballot({"v3", {"B", "NULL"}, 4}, roster)));
}

TEST(ValidateBallot, IdkIsAnIdentifierLikeAnyOther) {
  CandidateRoster r({"A", "B", "NULL", "IDK"}, "NULL", std::string("IDK"));
  EXPECT_TRUE(std::holds_alternative<Ballot>(validate_ballot({"v", {"IDK", "A"}, 1}, r)));
  EXPECT_TRUE(std::holds_alternative<BallotRejection>(validate_ballot({"v", {"IDK", "A", "IDK"}, 1}, r)));
}

TEST(ValidateBallots, StrictModeRejectsRepeatedVoters) {
  auto roster = roster_of({"A", "NULL"});
  std::vector<RawBallot> raws{{"v1", {"A"}, 2}, {"v1", {"NULL"}, 3}};
  EXPECT_EQ(validate_ballots(raws, roster, {false}).accepted.size(), 2u);
  auto strict = validate_ballots(raws, roster, {true});
  EXPECT_EQ(strict.accepted.size(), 1u);
  ASSERT_EQ(strict.rejected.size(), 1u);
  EXPECT_EQ(strict.rejected[0].kind, BallotRejection::Kind::DuplicateVoter);
}

TEST(WriteBallots, RoundTripsThroughParser) {
  std::mt19937_64 rng(11);
  auto roster = roster_of({"A", "B", "C", "D", "NULL"});
  auto ballots = stagevote::testing::random_ballots(rng, roster, 50, 1, 5);
  std::ostringstream out;
  write_ballots_csv(out, ballots, 5);
  std::istringstream in(out.str());
  auto f = parse_ballots(in);
  auto checked = validate_ballots(f.ballots, roster);
  ASSERT_TRUE(checked.rejected.empty());
  ASSERT_EQ(checked.accepted.size(), ballots.size());
  for (std::size_t i = 0; i < ballots.size(); ++i) {
    EXPECT_EQ(checked.accepted[i].voter_id, ballots[i].voter_id);
    EXPECT_EQ(checked.accepted[i].prefs, ballots[i].prefs);
  }
}

TEST(ExpandIncomplete, SpreadsMissingRowsOverUnstampedCandidates) {
  auto roster = roster_of({"A", "B", "C", "NULL"});
  auto fb = expand_incomplete({"v", {"A"}}, roster, 3);
  EXPECT_EQ(fb.weights(0, 0), Fraction(1));
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_EQ(fb.weights(i, 0), Fraction(0));
    for (std::size_t c = 1; c < 4; ++c) EXPECT_EQ(fb.weights(i, c), Fraction(1, 3));
  }
}

TEST(ExpandIncomplete, IdkStampCountsAsMissing) {
  CandidateRoster r({"A", "B", "C", "NULL", "IDK"}, "NULL", std::string("IDK"));
  auto fb = expand_incomplete({"v", {"IDK", "B"}}, r, 2);
  EXPECT_EQ(fb.weights(1, 1), Fraction(1));
  EXPECT_EQ(fb.weights(0, 1), Fraction(0));
  EXPECT_EQ(fb.weights(0, 0), Fraction(1, 3));
  EXPECT_EQ(fb.weights(0, 3), Fraction(1, 3));
}

TEST(ExpandIncomplete, StampsBeyondNumPrefsAreIgnored) {
  auto roster = roster_of({"A", "B", "NULL"});
  auto fb = expand_incomplete({"v", {"A", "B", "NULL"}}, roster, 1);
  EXPECT_EQ(fb.weights.rows(), 1u);
  EXPECT_EQ(fb.weights(0, 0), Fraction(1));
}

TEST(ExpandIncomplete, LiteralModeLeavesGapsEmpty) {
  auto roster = roster_of({"A", "B", "NULL"});
  auto fb = expand_incomplete({"v", {"B"}}, roster, 3, Expansion::literal);
  EXPECT_EQ(fb.row_sum(0), Fraction(1));
  EXPECT_EQ(fb.row_sum(1), Fraction(0));
  EXPECT_EQ(fb.row_sum(2), Fraction(0));
}

TEST(ExpandIncomplete, RejectsOutOfRangeNumPrefs) {
  auto roster = roster_of({"A", "NULL"});
  EXPECT_THROW(expand_incomplete({"v", {"A"}}, roster, 0), ConfigError);
  EXPECT_THROW(expand_incomplete({"v", {"A"}}, roster, 3), ConfigError);
}

TEST(ExpandIncomplete, ColumnMassEqualsStampsPlusShares) {
  // Per column, the total weight over all rows is 1 for stamped candidates
  // and (missing rows)/(unstamped count) otherwise.
  std::mt19937_64 rng(5);
  auto roster = roster_of({"A", "B", "C", "D", "E", "NULL"});
  for (int trial = 0; trial < 200; ++trial) {
    auto b = stagevote::testing::random_ballots(rng, roster, 1, 0, 6).front();
    const std::size_t p = 1 + rng() % 6;
    auto fb = expand_incomplete(b, roster, p);
    const std::size_t stamped = std::min(p, b.prefs.size());
    const auto missing = static_cast<std::int64_t>(p - stamped);
    const auto unstamped = static_cast<std::int64_t>(roster.size() - stamped);
    for (std::size_t c = 0; c < roster.size(); ++c) {
      Fraction col;
      for (std::size_t i = 0; i < p; ++i) col += fb.weights(i, c);
      const auto pos = std::find(b.prefs.begin(), b.prefs.begin() + static_cast<std::ptrdiff_t>(stamped),
                                 roster.candidates()[c]);
      const bool is_stamped = pos != b.prefs.begin() + static_cast<std::ptrdiff_t>(stamped);
      EXPECT_EQ(col, is_stamped ? Fraction(1) : Fraction(missing, unstamped));
    }
  }
}
