#include "recbench/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "recbench/error.hpp"
#include "recbench/random.hpp"

namespace recbench {
namespace {

// Guards floor(r * g) against products like 0.7 * 10 = 6.999...
std::size_t floor_share(double ratio, std::size_t size) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(size) + 1e-9));
}

}  // namespace

std::string EvalPlan::setting() const {
  std::string out = ordering == Ordering::random ? "RO_" : "TO_";
  out += splitting == Splitting::ratio ? "RS," : "LS,";
  out += full_ranking() ? "full" : "uni" + std::to_string(uni_negatives);
  return out;
}

void EvalPlan::validate() const {
  const auto& r = ratios;
  if (r.train <= 0.0 || r.valid <= 0.0 || r.test <= 0.0) {
    throw ConfigError("split ratios must be positive");
  }
  if (std::abs(r.train + r.valid + r.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  if (!group_by_user) throw ConfigError("only per-user grouping is supported");
}

EvalPlan parse_eval_setting(std::string_view spec) {
  const auto fail = [&]() -> EvalPlan {
    throw ParseError("unparseable evaluation setting '" + std::string(spec) +
                     "', expected (RO|TO)_(RS|LS),(full|uni<N>)");
  };
  if (spec.size() < 7 || spec[2] != '_' || spec[5] != ',') return fail();
  EvalPlan plan;
  const auto order = spec.substr(0, 2);
  const auto split = spec.substr(3, 2);
  const auto mode = spec.substr(6);
  if (order == "RO") {
    plan.ordering = Ordering::random;
  } else if (order == "TO") {
    plan.ordering = Ordering::temporal;
  } else {
    return fail();
  }
  if (split == "RS") {
    plan.splitting = Splitting::ratio;
  } else if (split == "LS") {
    plan.splitting = Splitting::leave_one_out;
  } else {
    return fail();
  }
  if (mode == "full") {
    plan.uni_negatives = 0;
  } else if (mode.substr(0, 3) == "uni" && mode.size() > 3) {
    const auto digits = mode.substr(3);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || n == 0) return fail();
    plan.uni_negatives = n;
  } else {
    return fail();
  }
  return plan;
}

std::vector<UserGroup> group_by_user(const Dataset& ds) {
  const auto& users = ds.user_ids();
  std::vector<std::vector<std::size_t>> rows_of(static_cast<std::size_t>(ds.n_users()));
  for (std::size_t r = 0; r < users.size(); ++r) {
    rows_of[static_cast<std::size_t>(users[r])].push_back(r);
  }
  std::vector<UserGroup> groups;
  for (std::size_t u = 0; u < rows_of.size(); ++u) {
    if (rows_of[u].empty()) continue;
    groups.push_back(UserGroup{static_cast<Id>(u), std::move(rows_of[u])});
  }
  return groups;
}

std::vector<UserGroup> order_rows(std::vector<UserGroup> groups, const Dataset& ds,
                                  Ordering ordering, std::uint64_t seed) {
  if (ordering == Ordering::random) {
    for (auto& group : groups) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(group.user)));
      shuffle_in_place(std::span<std::size_t>(group.rows), rng);
    }
    return groups;
  }
  const auto timestamps = ds.timestamps();
  for (auto& group : groups) {
    std::stable_sort(group.rows.begin(), group.rows.end(),
                     [&](std::size_t a, std::size_t b) { return timestamps[a] < timestamps[b]; });
  }
  return groups;
}

SplitResult split_rows(const std::vector<UserGroup>& ordered, Splitting splitting,
                       const SplitRatios& ratios) {
  SplitResult out;
  for (const auto& group : ordered) {
    const auto& rows = group.rows;
    const auto g = rows.size();
    std::size_t n_train = 0;
    std::size_t n_valid = 0;
    if (splitting == Splitting::ratio) {
      n_train = floor_share(ratios.train, g);
      n_valid = std::min(floor_share(ratios.valid, g), g - n_train);
    } else if (g == 1) {
      n_train = 1;
    } else if (g == 2) {
      n_train = 1;
    } else {
      n_train = g - 2;
      n_valid = 1;
    }
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<long>(n_train));
    out.valid.insert(out.valid.end(), rows.begin() + static_cast<long>(n_train),
                     rows.begin() + static_cast<long>(n_train + n_valid));
    out.test.insert(out.test.end(), rows.begin() + static_cast<long>(n_train + n_valid),
                    rows.end());
  }
  return out;
}

SplitResult split_dataset(const Dataset& ds, const EvalPlan& plan) {
  plan.validate();
  if (plan.ordering == Ordering::temporal && !ds.has_timestamp()) {
    throw SchemaError("temporal ordering requires a float '" + ds.fields().timestamp +
                      "' interaction field");
  }
  auto groups = order_rows(group_by_user(ds), ds, plan.ordering, plan.seed);
  return split_rows(groups, plan.splitting, plan.ratios);
}

std::vector<std::vector<Id>> items_by_user(const Dataset& ds, std::span<const std::size_t> rows) {
  const auto& users = ds.user_ids();
  const auto& items = ds.item_ids();
  std::vector<std::vector<Id>> out(static_cast<std::size_t>(ds.n_users()));
  for (auto r : rows) out[static_cast<std::size_t>(users[r])].push_back(items[r]);
  for (auto& list : out) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return out;
}

std::size_t CandidateSet::candidate_count(std::size_t index) const {
  if (full) return static_cast<std::size_t>(n_items > 0 ? n_items - 1 : 0);
  return users.at(index).candidates.size();
}

std::vector<Id> CandidateSet::candidates_of(std::size_t index) const {
  if (!full) return users.at(index).candidates;
  std::vector<Id> all(static_cast<std::size_t>(n_items > 0 ? n_items - 1 : 0));
  std::iota(all.begin(), all.end(), Id{1});
  return all;
}

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population, std::size_t count,
                                                      std::uint64_t seed) {
  if (count > population) throw DataError("sample larger than population");
  Rng rng(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = population - count; j < population; ++j) {
    const auto t = uniform_below(rng, j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

CandidateSet build_candidates(const Dataset& ds, const SplitResult& split, EvalTarget target,
                              std::size_t uni_negatives, std::uint64_t seed) {
  CandidateSet out;
  out.full = uni_negatives == 0;
  out.n_items = ds.n_items();
  const auto& target_rows = target == EvalTarget::test ? split.test : split.valid;
  const auto positives = items_by_user(ds, target_rows);

  std::vector<std::vector<Id>> known;
  if (!out.full) {
    std::vector<std::size_t> all_rows;
    all_rows.reserve(split.train.size() + split.valid.size() + split.test.size());
    for (const auto* part : {&split.train, &split.valid, &split.test}) {
      all_rows.insert(all_rows.end(), part->begin(), part->end());
    }
    known = items_by_user(ds, all_rows);
  }
  const auto n_real = static_cast<std::uint64_t>(ds.n_items() - 1);
  const std::uint64_t stream_tag = target == EvalTarget::test ? 1 : 0;

  for (std::size_t u = 0; u < positives.size(); ++u) {
    if (positives[u].empty()) continue;
    UserCandidates entry;
    entry.user = static_cast<Id>(u);
    entry.positives = positives[u];
    if (!out.full) {
      const auto& exclude = known[u];
      const auto eligible = n_real - exclude.size();
      if (eligible < uni_negatives) {
        const auto& token = ds.vocabulary(ds.fields().user_id).token(entry.user);
        throw DataError("user '" + token + "' has only " + std::to_string(eligible) +
                        " eligible negatives, " + std::to_string(uni_negatives) + " required");
      }
      std::vector<Id> candidates = entry.positives;
      Rng stream(derive_seed(seed, 2 * static_cast<std::uint64_t>(u) + stream_tag));
      // One distinct draw of N per positive when the catalog allows it,
      // otherwise N per positive independently (the union then overlaps).
      const auto total = uni_negatives * entry.positives.size();
      const bool joint = eligible >= total;
      const auto draws = joint ? std::size_t{1} : entry.positives.size();
      for (std::size_t p = 0; p < draws; ++p) {
        for (auto k : sample_without_replacement(eligible, joint ? total : uni_negatives, stream())) {
          // k-th eligible item: skip over excluded IDs, which are sorted.
          auto item = static_cast<Id>(k) + 1;
          for (auto excluded : exclude) {
            if (excluded <= item) {
              ++item;
            } else {
              break;
            }
          }
          candidates.push_back(item);
        }
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      entry.candidates = std::move(candidates);
    }
    out.users.push_back(std::move(entry));
  }
  return out;
}

}  // namespace recbench
