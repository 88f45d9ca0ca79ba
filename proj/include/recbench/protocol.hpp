#pragma once

// Evaluation protocols assembled from four independent choices: how rows are
// grouped, ordered, split, and which candidates each user is ranked against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recbench/dataset.hpp"

namespace recbench {

enum class Ordering { random, temporal };
enum class Splitting { ratio, leave_one_out };

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct EvalPlan {
  Ordering ordering = Ordering::random;
  Splitting splitting = Splitting::ratio;
  SplitRatios ratios;
  // 0 means full ranking; N > 0 means uniN sampled ranking.
  std::size_t uni_negatives = 0;
  bool group_by_user = true;
  std::uint64_t seed = 2020;

  bool full_ranking() const { return uni_negatives == 0; }
  // Canonical `RO_RS,full` form.
  std::string setting() const;
  // Throws ConfigError on invalid ratios.
  void validate() const;
};

// Parses `(RO|TO)_(RS|LS),(full|uni<N>)`.
EvalPlan parse_eval_setting(std::string_view spec);

struct UserGroup {
  Id user = kPaddingId;
  std::vector<std::size_t> rows;
};

// One group per user with interactions, ascending by user ID; rows keep
// their file order.
std::vector<UserGroup> group_by_user(const Dataset& ds);

// random: seeded uniform shuffle per group, streams derived from (seed, user).
// temporal: ascending timestamp, stable on ties. Throws SchemaError when the
// dataset has no timestamp field.
std::vector<UserGroup> order_rows(std::vector<UserGroup> groups, const Dataset& ds,
                                  Ordering ordering, std::uint64_t seed);

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// ratio: per group, floor(train * g) rows to train, floor(valid * g) to
// valid, the remainder to test. leave_one_out: last row to test, second to
// last to valid, the rest to train; groups of 1 go to train, groups of 2 to
// train and test.
SplitResult split_rows(const std::vector<UserGroup>& ordered, Splitting splitting,
                       const SplitRatios& ratios = {});

// Convenience: group, order and split per the plan.
SplitResult split_dataset(const Dataset& ds, const EvalPlan& plan);

// Sorted, de-duplicated items of the given rows, indexed by user ID.
std::vector<std::vector<Id>> items_by_user(const Dataset& ds, std::span<const std::size_t> rows);

enum class EvalTarget { valid, test };

struct UserCandidates {
  Id user = kPaddingId;
  // Sorted target items of this user.
  std::vector<Id> positives;
  // Sorted candidates (positives plus sampled negatives). Empty in full mode,
  // where every real item is a candidate.
  std::vector<Id> candidates;
};

struct CandidateSet {
  bool full = true;
  Id n_items = 0;
  std::vector<UserCandidates> users;

  std::size_t candidate_count(std::size_t index) const;
  std::vector<Id> candidates_of(std::size_t index) const;
};

// Users with at least one target row, ascending by ID. uniN draws N
// negatives per target positive, uniformly from the items the user never
// interacted with in any split, all distinct when enough such items exist.
// The per-user stream is derived from (seed, user, target). Throws DataError naming the user when fewer
// than N such items exist.
CandidateSet build_candidates(const Dataset& ds, const SplitResult& split, EvalTarget target,
                              std::size_t uni_negatives, std::uint64_t seed);

// `count` distinct values from [0, population), sorted; Floyd's algorithm.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population, std::size_t count,
                                                      std::uint64_t seed);

}  // namespace recbench
