#include "recbench/models/ease.hpp"

#include <Eigen/Dense>

#include "recbench/error.hpp"

namespace recbench {

EaseModel::EaseModel(double l2, Id n_items, UserHistory history, std::vector<double> weights)
    : l2_(l2), n_items_(n_items), history_(std::move(history)), weights_(std::move(weights)) {
  const auto n = static_cast<std::size_t>(n_items_);
  if (weights_.size() != n * n) throw CheckpointError("EASE weight matrix has the wrong size");
}

EaseModel EaseModel::fit(const Dataset& ds, std::span<const std::size_t> train_rows, double l2) {
  if (!(l2 > 0.0)) throw ConfigError("ease needs a positive l2 weight");
  auto history = UserHistory::from_rows(ds, train_rows);
  const auto n = static_cast<Eigen::Index>(ds.n_items());

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t u = 0; u < history.users(); ++u) {
    const auto items = history.of(static_cast<Id>(u));
    for (auto a : items) {
      for (auto b : items) gram(a, b) += 1.0;
    }
  }
  gram.diagonal().array() += l2;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw DataError("EASE Gram matrix is not positive definite");
  const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(n, n));

  std::vector<double> weights(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      weights[static_cast<std::size_t>(i * n + j)] = i == j ? 0.0 : -p(i, j) / p(j, j);
    }
  }
  return EaseModel(l2, ds.n_items(), std::move(history), std::move(weights));
}

EaseModel EaseModel::from_state(const ModelState& state) {
  return EaseModel(state.hyper("l2"), static_cast<Id>(state.hyper("n_items")),
                   UserHistory::from_state(state), state.array("weights"));
}

std::vector<double> EaseModel::full_sort_predict(std::span<const Id> users) const {
  const auto n = static_cast<std::size_t>(n_items_);
  std::vector<double> out(users.size() * n, 0.0);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    double* row = out.data() + r * n;
    for (auto j : history_.of(users[r])) {
      const double* w = weights_.data() + static_cast<std::size_t>(j) * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += w[i];
    }
  }
  return out;
}

std::vector<double> EaseModel::score_pairs(std::span<const Id> users,
                                           std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(users.size(), 0.0);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    check_item(items[r]);
    for (auto j : history_.of(users[r])) out[r] += weight(j, items[r]);
  }
  return out;
}

ModelState EaseModel::state() const {
  ModelState s;
  s.kind = std::string(kind());
  s.hyperparameters["l2"] = l2_;
  s.hyperparameters["n_items"] = static_cast<double>(n_items_);
  history_.store(s);
  s.arrays["weights"] = weights_;
  return s;
}

ModelState ease_model(const Dataset& ds, const SplitResult& split, double l2) {
  return EaseModel::fit(ds, split.train, l2).state();
}

}  // namespace recbench
