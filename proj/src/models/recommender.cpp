#include "recbench/models/recommender.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/error.hpp"
#include "recbench/protocol.hpp"

namespace recbench {

std::string_view to_string(LossKind kind) { return kind == LossKind::bpr ? "bpr" : "margin"; }

LossKind parse_loss_kind(std::string_view text) {
  if (text == "bpr") return LossKind::bpr;
  if (text == "margin") return LossKind::margin;
  throw ConfigError("unknown loss '" + std::string(text) + "', expected bpr or margin");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
  if (l2 < 0.0) throw ConfigError("L2 weight must be non-negative");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (patience == 0) throw ConfigError("patience must be at least 1");
  if (margin <= 0.0) throw ConfigError("margin must be positive");
}

double ModelState::hyper(std::string_view name) const {
  const auto it = hyperparameters.find(std::string(name));
  if (it == hyperparameters.end()) {
    throw CheckpointError(kind + " state lacks hyperparameter '" + std::string(name) + "'");
  }
  return it->second;
}

const std::vector<double>& ModelState::array(std::string_view name) const {
  const auto it = arrays.find(std::string(name));
  if (it == arrays.end()) {
    throw CheckpointError(kind + " state lacks array '" + std::string(name) + "'");
  }
  return it->second;
}

double& GradientRows::at(std::size_t row, std::size_t col) {
  auto& r = rows[row];
  if (r.empty()) r.assign(width, 0.0);
  return r[col];
}

double GradientRows::get(std::size_t row, std::size_t col) const {
  const auto it = rows.find(row);
  return it == rows.end() ? 0.0 : it->second[col];
}

double Recommender::loss_and_gradient(const Batch& /*batch*/, Gradient* /*grad*/) const {
  return 0.0;
}

void Recommender::apply_gradient(const Gradient& /*grad*/, double /*learning_rate*/) {}

double Recommender::train_step(const Batch& batch, double learning_rate) {
  Gradient grad;
  const double loss = loss_and_gradient(batch, &grad);
  apply_gradient(grad, learning_rate);
  return loss;
}

std::vector<double> Recommender::predict(const Batch& batch) const {
  return score_pairs(batch.ids(kUserColumn), batch.ids(kItemColumn));
}

std::vector<double> Recommender::score_pairs(std::span<const Id> users,
                                             std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    check_item(items[i]);
    const Id user = users[i];
    const auto row = full_sort_predict(std::span<const Id>(&user, 1));
    out[i] = row[static_cast<std::size_t>(items[i])];
  }
  return out;
}

void Recommender::check_user(Id user) const {
  if (user < 0 || user >= n_users()) {
    throw DataError("user ID " + std::to_string(user) + " outside the model's range");
  }
}

void Recommender::check_item(Id item) const {
  if (item < 0 || item >= n_items()) {
    throw DataError("item ID " + std::to_string(item) + " outside the model's range");
  }
}

ScoreSource score_source(const Recommender& model) {
  ScoreSource source;
  source.full = [&model](std::span<const Id> users) { return model.full_sort_predict(users); };
  source.pairs = [&model](std::span<const Id> users, std::span<const Id> items) {
    Batch batch;
    batch.set(std::string(kUserColumn), std::vector<Id>(users.begin(), users.end()));
    batch.set(std::string(kItemColumn), std::vector<Id>(items.begin(), items.end()));
    return model.predict(batch);
  };
  return source;
}

UserHistory UserHistory::from_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  const auto lists = items_by_user(ds, rows);
  UserHistory h;
  h.offsets.reserve(lists.size() + 1);
  h.offsets.push_back(0);
  for (const auto& list : lists) {
    h.items.insert(h.items.end(), list.begin(), list.end());
    h.offsets.push_back(h.items.size());
  }
  return h;
}

UserHistory UserHistory::from_state(const ModelState& state) {
  UserHistory h;
  for (double v : state.array("history_offsets")) h.offsets.push_back(static_cast<std::size_t>(v));
  for (double v : state.array("history_items")) h.items.push_back(static_cast<Id>(v));
  if (h.offsets.empty() || h.offsets.back() != h.items.size()) {
    throw CheckpointError("inconsistent user history arrays");
  }
  return h;
}

void UserHistory::store(ModelState& state) const {
  state.arrays["history_offsets"] = std::vector<double>(offsets.begin(), offsets.end());
  state.arrays["history_items"] = std::vector<double>(items.begin(), items.end());
}

}  // namespace recbench
