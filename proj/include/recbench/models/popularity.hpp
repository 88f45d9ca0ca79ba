#pragma once

#include "recbench/models/recommender.hpp"
#include "recbench/protocol.hpp"

namespace recbench {

// Scores every item by its training interaction count, for every user.
class PopularityModel final : public Recommender {
 public:
  PopularityModel(Id n_users, std::vector<double> item_counts);

  static PopularityModel fit(const Dataset& ds, std::span<const std::size_t> train_rows);
  static PopularityModel from_state(const ModelState& state);

  std::string_view kind() const override { return "pop"; }
  Id n_users() const override { return n_users_; }
  Id n_items() const override { return static_cast<Id>(counts_.size()); }

  std::vector<double> full_sort_predict(std::span<const Id> users) const override;
  ModelState state() const override;

  const std::vector<double>& item_counts() const { return counts_; }

 protected:
  std::vector<double> score_pairs(std::span<const Id> users,
                                  std::span<const Id> items) const override;

 private:
  Id n_users_;
  std::vector<double> counts_;
};

ModelState popularity_model(const Dataset& ds, const SplitResult& split);

}  // namespace recbench
