#pragma once

// Small dataset builders shared by the unit and acceptance tests.

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "recbench/dataset.hpp"
#include "recbench/random.hpp"

namespace recbench::fixtures {

struct Row {
  std::string user;
  std::string item;
  double timestamp = 0.0;
};

inline Dataset make_dataset(const std::vector<Row>& rows, bool with_timestamp = true) {
  TokenColumn users, items;
  FloatColumn times;
  for (const auto& r : rows) {
    users.emplace_back(r.user);
    items.emplace_back(r.item);
    times.emplace_back(r.timestamp);
  }
  std::vector<FieldSpec> schema{{"user_id", FieldType::token}, {"item_id", FieldType::token}};
  std::vector<Column> cols{users, items};
  if (with_timestamp) {
    schema.push_back({"timestamp", FieldType::float_});
    cols.emplace_back(times);
  }
  DatasetSources src{DataTable(AtomicFileKind::inter, schema, cols), {}, {}, {}, {}, {}};
  return Dataset::build(src);
}

// Random interactions: each user gets a random number of distinct items with
// random timestamps.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n_users, std::size_t n_items,
                              std::size_t max_per_user) {
  Rng rng(seed);
  std::vector<Row> rows;
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto n = 1 + uniform_below(rng, std::min(max_per_user, n_items));
    std::vector<std::size_t> perm(n_items);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle_in_place(std::span<std::size_t>(perm), rng);
    for (std::size_t k = 0; k < n; ++k) {
      rows.push_back({"u" + std::to_string(u), "i" + std::to_string(perm[k]),
                      static_cast<double>(uniform_below(rng, 20))});
    }
  }
  return make_dataset(rows);
}

// Rank-4 planted factors: users and items get N(0,1) factors, and the
// globally highest `fraction` of the user x item scores become interactions.
inline std::vector<Row> planted_rows(std::uint64_t seed, std::size_t n_users, std::size_t n_items,
                                     std::size_t rank = 4, double fraction = 0.05) {
  Rng rng(seed);
  std::vector<double> p(n_users * rank), q(n_items * rank);
  for (auto& v : p) v = standard_normal(rng);
  for (auto& v : q) v = standard_normal(rng);
  std::vector<std::pair<double, std::size_t>> scores;
  scores.reserve(n_users * n_items);
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t i = 0; i < n_items; ++i) {
      double s = 0.0;
      for (std::size_t f = 0; f < rank; ++f) s += p[u * rank + f] * q[i * rank + f];
      scores.emplace_back(s, u * n_items + i);
    }
  }
  const auto keep = static_cast<std::size_t>(fraction * static_cast<double>(scores.size()));
  std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(keep), scores.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  scores.resize(keep);
  std::sort(scores.begin(), scores.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<Row> rows;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const auto cell = scores[k].second;
    rows.push_back({"u" + std::to_string(cell / n_items), "i" + std::to_string(cell % n_items),
                    static_cast<double>(k)});
  }
  return rows;
}

inline void write_inter_file(const std::vector<Row>& rows, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::string text = "user_id:token,item_id:token,timestamp:float\n";
  for (const auto& r : rows) {
    text += r.user + "," + r.item + "," + std::to_string(static_cast<long long>(r.timestamp)) + "\n";
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

// Fresh directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("recbench_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace recbench::fixtures
