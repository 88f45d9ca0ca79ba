#pragma once

#include "recbench/models/recommender.hpp"
#include "recbench/protocol.hpp"

namespace recbench {

// Linear item-item autoencoder with a zero-diagonal constraint, solved in
// closed form: P = (X^T X + l2 I)^-1, B = I - P diag(1 / diag P).
// score(u, .) = x_u B.
class EaseModel final : public Recommender {
 public:
  static EaseModel fit(const Dataset& ds, std::span<const std::size_t> train_rows, double l2);
  static EaseModel from_state(const ModelState& state);

  std::string_view kind() const override { return "ease"; }
  Id n_users() const override { return static_cast<Id>(history_.users()); }
  Id n_items() const override { return n_items_; }

  std::vector<double> full_sort_predict(std::span<const Id> users) const override;
  ModelState state() const override;

  // Row-major n_items x n_items weights.
  const std::vector<double>& weights() const { return weights_; }
  double weight(Id from, Id to) const {
    return weights_[static_cast<std::size_t>(from) * static_cast<std::size_t>(n_items_) +
                    static_cast<std::size_t>(to)];
  }

 protected:
  std::vector<double> score_pairs(std::span<const Id> users,
                                  std::span<const Id> items) const override;

 private:
  EaseModel(double l2, Id n_items, UserHistory history, std::vector<double> weights);

  double l2_;
  Id n_items_;
  UserHistory history_;
  std::vector<double> weights_;
};

ModelState ease_model(const Dataset& ds, const SplitResult& split, double l2);

}  // namespace recbench
