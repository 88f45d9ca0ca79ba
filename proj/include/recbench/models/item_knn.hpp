#pragma once

#include "recbench/models/recommender.hpp"
#include "recbench/protocol.hpp"

namespace recbench {

struct ItemKnnParams {
  std::size_t k = 100;
  double shrink = 0.0;
};

// Item-based neighbourhood model on the binary train matrix.
//   sim(i, j) = |U_i ∩ U_j| / (sqrt|U_i| sqrt|U_j| + shrink)
// Each item keeps its k most similar other items (ties to the lower ID), and
//   score(u, i) = sum over j in train(u) of sim(i, j), j a kept neighbour of i.
class ItemKnnModel final : public Recommender {
 public:
  static ItemKnnModel fit(const Dataset& ds, std::span<const std::size_t> train_rows,
                          const ItemKnnParams& params);
  static ItemKnnModel from_state(const ModelState& state);

  std::string_view kind() const override { return "itemknn"; }
  Id n_users() const override { return static_cast<Id>(history_.users()); }
  Id n_items() const override { return n_items_; }

  std::vector<double> full_sort_predict(std::span<const Id> users) const override;
  ModelState state() const override;

  // Kept similarity of neighbour j for item i, 0 when j is not kept.
  double similarity(Id item, Id neighbour) const;

 protected:
  std::vector<double> score_pairs(std::span<const Id> users,
                                  std::span<const Id> items) const override;

 private:
  ItemKnnModel(ItemKnnParams params, Id n_items, UserHistory history,
               std::vector<std::size_t> offsets, std::vector<Id> neighbours,
               std::vector<double> weights);
  void build_reverse_index();

  ItemKnnParams params_;
  Id n_items_ = 0;
  UserHistory history_;
  // CSR over items: neighbours sorted by ID with their weights.
  std::vector<std::size_t> offsets_;
  std::vector<Id> neighbours_;
  std::vector<double> weights_;
  // Transpose: for neighbour j, the items i that kept it.
  std::vector<std::size_t> reverse_offsets_;
  std::vector<Id> reverse_items_;
  std::vector<double> reverse_weights_;
};

ModelState itemknn_model(const Dataset& ds, const SplitResult& split, std::size_t k,
                         double shrink);

}  // namespace recbench
