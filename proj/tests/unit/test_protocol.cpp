#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "recbench/error.hpp"
#include "recbench/protocol.hpp"
#include "support/fixtures.hpp"

using namespace recbench;

TEST(Protocol, ParsesSettings) {
  const auto p = parse_eval_setting("TO_LS,uni100");
  EXPECT_EQ(p.ordering, Ordering::temporal);
  EXPECT_EQ(p.splitting, Splitting::leave_one_out);
  EXPECT_EQ(p.uni_negatives, 100u);
  EXPECT_EQ(p.setting(), "TO_LS,uni100");
  EXPECT_TRUE(parse_eval_setting("RO_RS,full").full_ranking());
  EXPECT_THROW(parse_eval_setting("XX_RS,full"), ParseError);
  EXPECT_THROW(parse_eval_setting("RO_RS,uni0"), ParseError);
  EXPECT_THROW(parse_eval_setting("RO_RS"), ParseError);
}

TEST(Protocol, RatiosMustBeValid) {
  EvalPlan p;
  p.ratios = {0.8, 0.3, 0.1};
  EXPECT_THROW(p.validate(), ConfigError);
  p.ratios = {0.8, -0.1, 0.3};
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Protocol, SplitPropertiesOverRandomDatasets) {
  const std::vector<std::string> settings{"RO_RS,full", "RO_LS,full", "TO_RS,full", "TO_LS,full"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = fixtures::random_dataset(seed, 12, 15, 12);
    const auto ts = ds.timestamps();
    const auto& users = ds.user_ids();
    std::map<Id, std::vector<std::size_t>> rows_of;
    for (std::size_t r = 0; r < users.size(); ++r) rows_of[users[r]].push_back(r);

    for (const auto& s : settings) {
      auto plan = parse_eval_setting(s);
      plan.seed = seed;
      const auto split = split_dataset(ds, plan);
      // Exact partition.
      std::vector<std::size_t> all = split.train;
      all.insert(all.end(), split.valid.begin(), split.valid.end());
      all.insert(all.end(), split.test.begin(), split.test.end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expected(ds.interaction_count());
      std::iota(expected.begin(), expected.end(), std::size_t{0});
      ASSERT_EQ(all, expected) << s;

      std::map<Id, std::size_t> n_train, n_valid, n_test;
      for (auto r : split.train) ++n_train[users[r]];
      for (auto r : split.valid) ++n_valid[users[r]];
      for (auto r : split.test) ++n_test[users[r]];
      for (const auto& [u, rows] : rows_of) {
        const auto g = rows.size();
        if (plan.splitting == Splitting::ratio) {
          const auto tr = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(g) + 1e-9));
          const auto va = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(g) + 1e-9));
          EXPECT_EQ(n_train[u], tr);
          EXPECT_EQ(n_valid[u], va);
          EXPECT_EQ(n_test[u], g - tr - va);
        } else {
          EXPECT_EQ(n_test[u], g >= 2 ? 1u : 0u);
          EXPECT_EQ(n_valid[u], g >= 3 ? 1u : 0u);
        }
      }
      if (s == "TO_LS,full") {
        for (auto r : split.test) {
          double max_t = -1;
          for (auto q : rows_of[users[r]]) max_t = std::max(max_t, ts[q]);
          EXPECT_EQ(ts[r], max_t);
        }
        // Temporal ordering never puts a later train row after a test row.
        std::map<Id, double> test_time;
        for (auto r : split.test) test_time[users[r]] = ts[r];
        for (auto r : split.train) {
          if (test_time.count(users[r])) EXPECT_LE(ts[r], test_time[users[r]]);
        }
      }
    }
  }
}

TEST(Protocol, RandomOrderingIsSeeded) {
  const auto ds = fixtures::random_dataset(3, 20, 30, 15);
  auto plan = parse_eval_setting("RO_RS,full");
  const auto a = split_dataset(ds, plan);
  const auto b = split_dataset(ds, plan);
  EXPECT_EQ(a.test, b.test);
  plan.seed = 99;
  const auto c = split_dataset(ds, plan);
  EXPECT_NE(a.test, c.test);
}

TEST(Protocol, TemporalOrderingNeedsTimestamps) {
  const auto ds = fixtures::make_dataset({{"u", "i", 0}, {"u", "j", 1}}, false);
  EXPECT_THROW(split_dataset(ds, parse_eval_setting("TO_LS,full")), SchemaError);
}

TEST(Protocol, SampledCandidatesAvoidEveryInteraction) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = fixtures::random_dataset(seed, 10, 40, 8);
    for (const auto* s : {"RO_LS,uni5", "TO_RS,uni10"}) {
      auto plan = parse_eval_setting(s);
      plan.seed = seed;
      const auto split = split_dataset(ds, plan);
      std::vector<std::size_t> all_rows(ds.interaction_count());
      std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
      const auto seen = items_by_user(ds, all_rows);
      for (auto target : {EvalTarget::valid, EvalTarget::test}) {
        const auto set = build_candidates(ds, split, target, plan.uni_negatives, plan.seed);
        ASSERT_FALSE(set.full);
        for (const auto& uc : set.users) {
          std::set<Id> cands(uc.candidates.begin(), uc.candidates.end());
          EXPECT_EQ(cands.size(), uc.candidates.size());
          const auto& hist = seen[static_cast<std::size_t>(uc.user)];
          const auto eligible = static_cast<std::size_t>(ds.n_items() - 1) - hist.size();
          if (eligible >= uc.positives.size() * plan.uni_negatives) {
            EXPECT_EQ(uc.candidates.size(), uc.positives.size() * (1 + plan.uni_negatives));
          }
          for (auto c : uc.candidates) {
            EXPECT_NE(c, kPaddingId);
            const bool positive = std::binary_search(uc.positives.begin(), uc.positives.end(), c);
            if (!positive) EXPECT_FALSE(std::binary_search(hist.begin(), hist.end(), c));
          }
        }
        // Deterministic.
        const auto again = build_candidates(ds, split, target, plan.uni_negatives, plan.seed);
        for (std::size_t k = 0; k < set.users.size(); ++k) {
          EXPECT_EQ(set.users[k].candidates, again.users[k].candidates);
        }
      }
    }
  }
}

TEST(Protocol, TooFewNegativesNamesTheUser) {
  const auto ds = fixtures::make_dataset({{"alice", "a", 0}, {"alice", "b", 1}, {"bob", "c", 0}});
  const auto split = split_dataset(ds, parse_eval_setting("TO_LS,full"));
  try {
    build_candidates(ds, split, EvalTarget::test, 5, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("alice"), std::string::npos);
  }
}

TEST(Protocol, FloydSamplingIsDistinctAndUniform) {
  std::vector<int> hits(10, 0);
  for (std::uint64_t s = 0; s < 5000; ++s) {
    const auto v = sample_without_replacement(10, 3, s);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    EXPECT_EQ(std::adjacent_find(v.begin(), v.end()), v.end());
    for (auto x : v) ++hits[x];
  }
  for (int h : hits) EXPECT_NEAR(h, 1500, 150);
}
