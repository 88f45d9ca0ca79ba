#pragma once

#include "recbench/models/recommender.hpp"
#include "recbench/random.hpp"

namespace recbench {

// Matrix factorization trained on (user, positive, negative) triples.
// x_ui = p_u . q_i; per-batch objective
//   mean over triples of loss(x_ui - x_uj) + l2/2 (|p_u|^2 + |q_i|^2 + |q_j|^2)
// with loss(d) = -ln sigmoid(d) (bpr) or max(0, margin - d) (margin).
class BprModel final : public Recommender {
 public:
  // Embeddings drawn from N(0, 0.01^2).
  BprModel(Id n_users, Id n_items, const TrainConfig& config, Rng& init);
  static BprModel from_state(const ModelState& state);

  std::string_view kind() const override { return "bpr"; }
  Id n_users() const override { return n_users_; }
  Id n_items() const override { return n_items_; }
  bool iterative() const override { return true; }
  bool pairwise() const override { return true; }

  double loss_and_gradient(const Batch& batch, Gradient* grad) const override;
  void apply_gradient(const Gradient& grad, double learning_rate) override;

  std::vector<double> full_sort_predict(std::span<const Id> users) const override;
  ModelState state() const override;

  std::size_t dim() const { return dim_; }
  std::span<const double> user_vector(Id user) const;
  std::span<const double> item_vector(Id item) const;
  std::vector<double>& user_embedding() { return users_; }
  std::vector<double>& item_embedding() { return items_; }

 protected:
  std::vector<double> score_pairs(std::span<const Id> users,
                                  std::span<const Id> items) const override;

 private:
  BprModel(Id n_users, Id n_items, std::size_t dim, double l2, LossKind loss, double margin);
  double dot(Id user, Id item) const;

  Id n_users_;
  Id n_items_;
  std::size_t dim_;
  double l2_;
  LossKind loss_;
  double margin_;
  std::vector<double> users_;
  std::vector<double> items_;
};

}  // namespace recbench
