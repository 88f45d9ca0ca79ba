#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recbench/batch.hpp"
#include "recbench/evaluator.hpp"

namespace recbench {

// Column names of the batches models consume.
inline constexpr std::string_view kUserColumn = "user_id";
inline constexpr std::string_view kItemColumn = "item_id";
inline constexpr std::string_view kNegItemColumn = "neg_item_id";
inline constexpr std::string_view kLabelColumn = "label";

enum class LossKind { bpr, margin };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

struct TrainConfig {
  // Step size on the batch-mean objective, so per-row steps are lr / batch.
  double learning_rate = 20.0;
  std::size_t embedding_dim = 32;
  double l2 = 1e-4;
  std::size_t batch_size = 256;
  std::size_t epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 2020;
  LossKind loss = LossKind::bpr;
  double margin = 1.0;

  // Throws ConfigError.
  void validate() const;
};

// Everything needed to rebuild a model: flat float arrays plus scalars.
struct ModelState {
  std::string kind;
  std::map<std::string, double> hyperparameters;
  std::map<std::string, std::vector<double>> arrays;
  std::size_t epoch = 0;
  std::string rng_state;

  double hyper(std::string_view name) const;
  const std::vector<double>& array(std::string_view name) const;

  bool operator==(const ModelState&) const = default;
};

// Gradient rows touched by a batch, keyed by parameter array. Each array is
// viewed as a matrix with `width` columns.
struct GradientRows {
  std::size_t width = 1;
  std::map<std::size_t, std::vector<double>> rows;

  double& at(std::size_t row, std::size_t col);
  double get(std::size_t row, std::size_t col) const;
};

using Gradient = std::map<std::string, GradientRows, std::less<>>;

// Two-function model contract: calculate_loss for training, predict for
// scoring, plus full_sort_predict for catalog-wide ranking.
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual std::string_view kind() const = 0;
  virtual Id n_users() const = 0;
  virtual Id n_items() const = 0;

  // Objective on `batch` under the current parameters. Closed-form models are
  // fitted when built and return 0.
  double calculate_loss(const Batch& batch) const { return loss_and_gradient(batch, nullptr); }

  // Objective value; also fills `grad` when non-null.
  virtual double loss_and_gradient(const Batch& batch, Gradient* grad) const;
  virtual void apply_gradient(const Gradient& grad, double learning_rate);
  // One gradient step on the batch. Returns the pre-step objective.
  double train_step(const Batch& batch, double learning_rate);

  // Whether training runs epochs; closed-form models are complete after fit.
  virtual bool iterative() const { return false; }
  // Pairwise models need a sampled negative per positive.
  virtual bool pairwise() const { return false; }

  // One score per row of the batch's user/item columns.
  virtual std::vector<double> predict(const Batch& batch) const;
  // Row-major users x n_items scores.
  virtual std::vector<double> full_sort_predict(std::span<const Id> users) const = 0;

  virtual ModelState state() const = 0;

 protected:
  // Pair scoring used by the default predict.
  virtual std::vector<double> score_pairs(std::span<const Id> users,
                                          std::span<const Id> items) const;
  void check_user(Id user) const;
  void check_item(Id item) const;
};

// Adapts a model to the evaluator's score interface.
ScoreSource score_source(const Recommender& model);

// Sorted item lists per user as CSR arrays (offsets has n_users + 1 entries).
struct UserHistory {
  std::vector<std::size_t> offsets;
  std::vector<Id> items;

  static UserHistory from_rows(const Dataset& ds, std::span<const std::size_t> rows);
  static UserHistory from_state(const ModelState& state);
  void store(ModelState& state) const;
  std::span<const Id> of(Id user) const {
    const auto u = static_cast<std::size_t>(user);
    return {items.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
  std::size_t users() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

}  // namespace recbench
