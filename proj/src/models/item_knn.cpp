#include "recbench/models/item_knn.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/error.hpp"

namespace recbench {

ItemKnnModel::ItemKnnModel(ItemKnnParams params, Id n_items, UserHistory history,
                           std::vector<std::size_t> offsets, std::vector<Id> neighbours,
                           std::vector<double> weights)
    : params_(params),
      n_items_(n_items),
      history_(std::move(history)),
      offsets_(std::move(offsets)),
      neighbours_(std::move(neighbours)),
      weights_(std::move(weights)) {
  if (offsets_.size() != static_cast<std::size_t>(n_items_) + 1 ||
      offsets_.back() != neighbours_.size() || neighbours_.size() != weights_.size()) {
    throw CheckpointError("inconsistent neighbour arrays");
  }
  build_reverse_index();
}

void ItemKnnModel::build_reverse_index() {
  const auto n = static_cast<std::size_t>(n_items_);
  reverse_offsets_.assign(n + 1, 0);
  for (auto j : neighbours_) ++reverse_offsets_[static_cast<std::size_t>(j) + 1];
  for (std::size_t i = 0; i < n; ++i) reverse_offsets_[i + 1] += reverse_offsets_[i];
  reverse_items_.resize(neighbours_.size());
  reverse_weights_.resize(neighbours_.size());
  auto cursor = reverse_offsets_;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const auto slot = cursor[static_cast<std::size_t>(neighbours_[p])]++;
      reverse_items_[slot] = static_cast<Id>(i);
      reverse_weights_[slot] = weights_[p];
    }
  }
}

ItemKnnModel ItemKnnModel::fit(const Dataset& ds, std::span<const std::size_t> train_rows,
                               const ItemKnnParams& params) {
  if (params.k == 0) throw ConfigError("itemknn needs k >= 1");
  if (params.shrink < 0.0) throw ConfigError("itemknn shrink must be non-negative");
  auto history = UserHistory::from_rows(ds, train_rows);
  const auto n = static_cast<std::size_t>(ds.n_items());

  // Users of each item, from the de-duplicated histories.
  std::vector<std::size_t> item_offsets(n + 1, 0);
  for (auto i : history.items) ++item_offsets[static_cast<std::size_t>(i) + 1];
  for (std::size_t i = 0; i < n; ++i) item_offsets[i + 1] += item_offsets[i];
  std::vector<Id> item_users(history.items.size());
  {
    auto cursor = item_offsets;
    for (std::size_t u = 0; u < history.users(); ++u) {
      for (auto i : history.of(static_cast<Id>(u))) {
        item_users[cursor[static_cast<std::size_t>(i)]++] = static_cast<Id>(u);
      }
    }
  }
  auto degree = [&](std::size_t i) {
    return static_cast<double>(item_offsets[i + 1] - item_offsets[i]);
  };

  std::vector<std::size_t> offsets{0};
  std::vector<Id> neighbours;
  std::vector<double> weights;
  std::vector<double> co(n, 0.0);
  std::vector<std::size_t> touched;
  std::vector<std::pair<double, Id>> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    touched.clear();
    for (auto p = item_offsets[i]; p < item_offsets[i + 1]; ++p) {
      for (auto j : history.of(item_users[p])) {
        const auto jj = static_cast<std::size_t>(j);
        if (jj == i) continue;
        if (co[jj] == 0.0) touched.push_back(jj);
        co[jj] += 1.0;
      }
    }
    ranked.clear();
    for (auto j : touched) {
      const double sim =
          co[j] / (std::sqrt(degree(i)) * std::sqrt(degree(j)) + params.shrink);
      ranked.emplace_back(sim, static_cast<Id>(j));
      co[j] = 0.0;
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    const auto keep = std::min(params.k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                      ranked.end(), better);
    ranked.resize(keep);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [sim, j] : ranked) {
      neighbours.push_back(j);
      weights.push_back(sim);
    }
    offsets.push_back(neighbours.size());
  }
  return ItemKnnModel(params, ds.n_items(), std::move(history), std::move(offsets),
                      std::move(neighbours), std::move(weights));
}

ItemKnnModel ItemKnnModel::from_state(const ModelState& state) {
  ItemKnnParams params;
  params.k = static_cast<std::size_t>(state.hyper("k"));
  params.shrink = state.hyper("shrink");
  std::vector<std::size_t> offsets;
  for (double v : state.array("neighbour_offsets")) offsets.push_back(static_cast<std::size_t>(v));
  std::vector<Id> neighbours;
  for (double v : state.array("neighbour_items")) neighbours.push_back(static_cast<Id>(v));
  return ItemKnnModel(params, static_cast<Id>(state.hyper("n_items")),
                      UserHistory::from_state(state), std::move(offsets), std::move(neighbours),
                      state.array("neighbour_weights"));
}

double ItemKnnModel::similarity(Id item, Id neighbour) const {
  check_item(item);
  const auto i = static_cast<std::size_t>(item);
  const auto first = neighbours_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto last = neighbours_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, neighbour);
  if (it == last || *it != neighbour) return 0.0;
  return weights_[static_cast<std::size_t>(it - neighbours_.begin())];
}

std::vector<double> ItemKnnModel::full_sort_predict(std::span<const Id> users) const {
  const auto n = static_cast<std::size_t>(n_items_);
  std::vector<double> out(users.size() * n, 0.0);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    double* row = out.data() + r * n;
    for (auto j : history_.of(users[r])) {
      const auto jj = static_cast<std::size_t>(j);
      for (auto p = reverse_offsets_[jj]; p < reverse_offsets_[jj + 1]; ++p) {
        row[static_cast<std::size_t>(reverse_items_[p])] += reverse_weights_[p];
      }
    }
  }
  return out;
}

std::vector<double> ItemKnnModel::score_pairs(std::span<const Id> users,
                                              std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(users.size(), 0.0);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    for (auto j : history_.of(users[r])) out[r] += similarity(items[r], j);
  }
  return out;
}

ModelState ItemKnnModel::state() const {
  ModelState s;
  s.kind = std::string(kind());
  s.hyperparameters["k"] = static_cast<double>(params_.k);
  s.hyperparameters["shrink"] = params_.shrink;
  s.hyperparameters["n_items"] = static_cast<double>(n_items_);
  history_.store(s);
  s.arrays["neighbour_offsets"] = std::vector<double>(offsets_.begin(), offsets_.end());
  s.arrays["neighbour_items"] = std::vector<double>(neighbours_.begin(), neighbours_.end());
  s.arrays["neighbour_weights"] = weights_;
  return s;
}

ModelState itemknn_model(const Dataset& ds, const SplitResult& split, std::size_t k,
                         double shrink) {
  return ItemKnnModel::fit(ds, split.train, {k, shrink}).state();
}

}  // namespace recbench
