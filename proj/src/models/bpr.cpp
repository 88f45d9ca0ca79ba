#include "recbench/models/bpr.hpp"

#include <algorithm>

#include "recbench/error.hpp"
#include "recbench/models/losses.hpp"

namespace recbench {
namespace {

constexpr double kInitStd = 0.01;

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

BprModel::BprModel(Id n_users, Id n_items, std::size_t dim, double l2, LossKind loss,
                   double margin)
    : n_users_(n_users),
      n_items_(n_items),
      dim_(dim),
      l2_(l2),
      loss_(loss),
      margin_(margin),
      users_(static_cast<std::size_t>(n_users) * dim, 0.0),
      items_(static_cast<std::size_t>(n_items) * dim, 0.0) {
  if (n_users < 2 || n_items < 2) throw DataError("bpr needs at least one user and one item");
}

BprModel::BprModel(Id n_users, Id n_items, const TrainConfig& config, Rng& init)
    : BprModel(n_users, n_items, config.embedding_dim, config.l2, config.loss, config.margin) {
  config.validate();
  for (auto& v : users_) v = kInitStd * standard_normal(init);
  for (auto& v : items_) v = kInitStd * standard_normal(init);
}

BprModel BprModel::from_state(const ModelState& state) {
  BprModel m(static_cast<Id>(state.hyper("n_users")), static_cast<Id>(state.hyper("n_items")),
             static_cast<std::size_t>(state.hyper("embedding_dim")), state.hyper("l2"),
             state.hyper("margin_loss") != 0.0 ? LossKind::margin : LossKind::bpr,
             state.hyper("margin"));
  const auto& u = state.array("user_embedding");
  const auto& i = state.array("item_embedding");
  if (u.size() != m.users_.size() || i.size() != m.items_.size()) {
    throw CheckpointError("bpr embedding arrays have the wrong size");
  }
  m.users_ = u;
  m.items_ = i;
  return m;
}

std::span<const double> BprModel::user_vector(Id user) const {
  return {users_.data() + static_cast<std::size_t>(user) * dim_, dim_};
}

std::span<const double> BprModel::item_vector(Id item) const {
  return {items_.data() + static_cast<std::size_t>(item) * dim_, dim_};
}

double BprModel::dot(Id user, Id item) const {
  const auto p = user_vector(user);
  const auto q = item_vector(item);
  double s = 0.0;
  for (std::size_t f = 0; f < dim_; ++f) s += p[f] * q[f];
  return s;
}

double BprModel::loss_and_gradient(const Batch& batch, Gradient* grad) const {
  const auto users = batch.ids(kUserColumn);
  const auto pos = batch.ids(kItemColumn);
  const auto neg = batch.ids(kNegItemColumn);
  if (users.empty()) throw DataError("empty training batch");
  const double n = static_cast<double>(users.size());
  GradientRows* gu = nullptr;
  GradientRows* gi = nullptr;
  if (grad != nullptr) {
    gu = &(*grad)["user_embedding"];
    gi = &(*grad)["item_embedding"];
    gu->width = dim_;
    gi->width = dim_;
  }
  double total = 0.0;
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    check_item(pos[r]);
    check_item(neg[r]);
    const double diff = dot(users[r], pos[r]) - dot(users[r], neg[r]);
    const auto p = user_vector(users[r]);
    const auto qi = item_vector(pos[r]);
    const auto qj = item_vector(neg[r]);
    double slope = 0.0;
    if (loss_ == LossKind::bpr) {
      total += softplus(-diff);
      slope = -sigmoid(-diff);
    } else {
      const double h = margin_ - diff;
      total += std::max(0.0, h);
      slope = h > 0.0 ? -1.0 : 0.0;
    }
    total += 0.5 * l2_ * (squared_norm(p) + squared_norm(qi) + squared_norm(qj));
    if (grad == nullptr) continue;
    const auto u = static_cast<std::size_t>(users[r]);
    const auto i = static_cast<std::size_t>(pos[r]);
    const auto j = static_cast<std::size_t>(neg[r]);
    for (std::size_t f = 0; f < dim_; ++f) {
      gu->at(u, f) += (slope * (qi[f] - qj[f]) + l2_ * p[f]) / n;
      gi->at(i, f) += (slope * p[f] + l2_ * qi[f]) / n;
      gi->at(j, f) += (-slope * p[f] + l2_ * qj[f]) / n;
    }
  }
  return total / n;
}

void BprModel::apply_gradient(const Gradient& grad, double learning_rate) {
  auto step = [&](std::string_view name, std::vector<double>& params) {
    const auto it = grad.find(name);
    if (it == grad.end()) return;
    for (const auto& [row, values] : it->second.rows) {
      double* dst = params.data() + row * dim_;
      for (std::size_t f = 0; f < dim_; ++f) dst[f] -= learning_rate * values[f];
    }
  };
  step("user_embedding", users_);
  step("item_embedding", items_);
}

std::vector<double> BprModel::full_sort_predict(std::span<const Id> users) const {
  const auto n = static_cast<std::size_t>(n_items_);
  std::vector<double> out(users.size() * n);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    for (std::size_t i = 0; i < n; ++i) out[r * n + i] = dot(users[r], static_cast<Id>(i));
  }
  return out;
}

std::vector<double> BprModel::score_pairs(std::span<const Id> users,
                                          std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(users.size());
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    check_item(items[r]);
    out[r] = dot(users[r], items[r]);
  }
  return out;
}

ModelState BprModel::state() const {
  ModelState s;
  s.kind = std::string(kind());
  s.hyperparameters["n_users"] = static_cast<double>(n_users_);
  s.hyperparameters["n_items"] = static_cast<double>(n_items_);
  s.hyperparameters["embedding_dim"] = static_cast<double>(dim_);
  s.hyperparameters["l2"] = l2_;
  s.hyperparameters["margin_loss"] = loss_ == LossKind::margin ? 1.0 : 0.0;
  s.hyperparameters["margin"] = margin_;
  s.arrays["user_embedding"] = users_;
  s.arrays["item_embedding"] = items_;
  return s;
}

}  // namespace recbench
