#pragma once

#include "recbench/models/recommender.hpp"
#include "recbench/random.hpp"

namespace recbench {

struct FeatureEntry {
  std::size_t index = 0;
  double value = 0.0;
};

// Sparse feature rows as CSR arrays.
struct FeatureRows {
  std::vector<std::size_t> offsets{0};
  std::vector<FeatureEntry> entries;

  std::span<const FeatureEntry> row(std::size_t r) const {
    return {entries.data() + offsets[r], offsets[r + 1] - offsets[r]};
  }
  std::size_t size() const { return offsets.size() - 1; }
};

// Feature space: user one-hot, item one-hot, then each side-table field of
// the user table followed by the item table. token fields one-hot (1),
// token_seq fields spread 1/len over their tokens, float fields carry their
// value. float_seq fields and missing values contribute nothing.
struct FmFeatureSpace {
  std::size_t n_features = 0;
  FeatureRows users;
  FeatureRows items;

  static FmFeatureSpace from_dataset(const Dataset& ds);
};

// Second-order factorization machine over the concatenated entries.
//   y = w0 + sum w_i x_i + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]
double fm_logit(std::span<const FeatureEntry> x, double bias, std::span<const double> linear,
                std::span<const double> factors, std::size_t dim);

// Pointwise CTR model trained with the logistic loss on (user, item, label)
// rows; the batch objective adds l2/2 on the touched linear and factor
// parameters. predict and full_sort_predict return sigmoid(y).
class FmModel final : public Recommender {
 public:
  FmModel(FmFeatureSpace features, Id n_users, Id n_items, const TrainConfig& config, Rng& init);
  static FmModel from_state(const ModelState& state);

  std::string_view kind() const override { return "fm"; }
  Id n_users() const override { return n_users_; }
  Id n_items() const override { return n_items_; }
  bool iterative() const override { return true; }

  double loss_and_gradient(const Batch& batch, Gradient* grad) const override;
  void apply_gradient(const Gradient& grad, double learning_rate) override;

  std::vector<double> full_sort_predict(std::span<const Id> users) const override;
  ModelState state() const override;

  // Raw score before the sigmoid, from the concatenated entries.
  double logit(Id user, Id item) const;
  const FmFeatureSpace& features() const { return features_; }
  std::size_t dim() const { return dim_; }
  double& bias() { return bias_; }
  std::vector<double>& linear() { return linear_; }
  std::vector<double>& factors() { return factors_; }

 protected:
  std::vector<double> score_pairs(std::span<const Id> users,
                                  std::span<const Id> items) const override;

 private:
  FmModel(FmFeatureSpace features, Id n_users, Id n_items, std::size_t dim, double l2);

  // Per-side sums so a user's row costs one pass over each item's entries.
  struct Partial {
    double linear = 0.0;
    std::vector<double> sum;     // sum_i v_if x_i
    double squares = 0.0;        // sum_f sum_i v_if^2 x_i^2
  };
  Partial partial(std::span<const FeatureEntry> x) const;
  double combine(const Partial& u, const Partial& i) const;
  std::vector<FeatureEntry> entries(Id user, Id item) const;

  FmFeatureSpace features_;
  Id n_users_;
  Id n_items_;
  std::size_t dim_;
  double l2_;
  double bias_ = 0.0;
  std::vector<double> linear_;
  std::vector<double> factors_;
};

}  // namespace recbench
