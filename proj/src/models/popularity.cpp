#include "recbench/models/popularity.hpp"

#include "recbench/error.hpp"

namespace recbench {

PopularityModel::PopularityModel(Id n_users, std::vector<double> item_counts)
    : n_users_(n_users), counts_(std::move(item_counts)) {}

PopularityModel PopularityModel::fit(const Dataset& ds, std::span<const std::size_t> train_rows) {
  std::vector<double> counts(static_cast<std::size_t>(ds.n_items()), 0.0);
  const auto& items = ds.item_ids();
  for (auto r : train_rows) counts[static_cast<std::size_t>(items[r])] += 1.0;
  return PopularityModel(ds.n_users(), std::move(counts));
}

PopularityModel PopularityModel::from_state(const ModelState& state) {
  return PopularityModel(static_cast<Id>(state.hyper("n_users")), state.array("item_counts"));
}

std::vector<double> PopularityModel::full_sort_predict(std::span<const Id> users) const {
  std::vector<double> out;
  out.reserve(users.size() * counts_.size());
  for (auto u : users) {
    check_user(u);
    out.insert(out.end(), counts_.begin(), counts_.end());
  }
  return out;
}

std::vector<double> PopularityModel::score_pairs(std::span<const Id> users,
                                                 std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    check_user(users[i]);
    check_item(items[i]);
    out[i] = counts_[static_cast<std::size_t>(items[i])];
  }
  return out;
}

ModelState PopularityModel::state() const {
  ModelState s;
  s.kind = std::string(kind());
  s.hyperparameters["n_users"] = static_cast<double>(n_users_);
  s.arrays["item_counts"] = counts_;
  return s;
}

ModelState popularity_model(const Dataset& ds, const SplitResult& split) {
  return PopularityModel::fit(ds, split.train).state();
}

}  // namespace recbench
