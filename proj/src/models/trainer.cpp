#include "recbench/models/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "recbench/error.hpp"
#include "recbench/models/bpr.hpp"
#include "recbench/models/ease.hpp"
#include "recbench/models/fm.hpp"
#include "recbench/models/item_knn.hpp"
#include "recbench/models/popularity.hpp"

namespace recbench {

TrainingSampler::TrainingSampler(const Dataset& ds, std::span<const std::size_t> train_rows,
                                 bool pairwise)
    : pairwise_(pairwise), n_items_(ds.n_items()) {
  if (train_rows.empty()) throw DataError("train split is empty");
  const auto& users = ds.user_ids();
  const auto& items = ds.item_ids();
  for (auto r : train_rows) {
    users_.push_back(users[r]);
    items_.push_back(items[r]);
  }
  if (pairwise_) {
    history_ = UserHistory::from_rows(ds, train_rows);
    for (std::size_t u = 0; u < history_.users(); ++u) {
      if (history_.of(static_cast<Id>(u)).size() + 1 >= static_cast<std::size_t>(n_items_)) {
        throw DataError("user " + ds.vocabulary(ds.fields().user_id).token(static_cast<Id>(u)) +
                        " has interacted with every item; no negative to sample");
      }
    }
    return;
  }
  const auto& label_field = ds.fields().label;
  if (!ds.inter().has_field(label_field)) {
    throw DataError("missing label column '" + label_field + "'");
  }
  const auto& column = ds.inter().column(label_field);
  const auto* labels = std::get_if<FloatColumn>(&column);
  if (labels == nullptr) throw DataError("label column '" + label_field + "' must be float");
  for (auto r : train_rows) {
    if (!(*labels)[r]) throw DataError("label missing in interaction row " + std::to_string(r));
    labels_.push_back(*(*labels)[r]);
  }
}

std::vector<Batch> TrainingSampler::epoch(Rng& rng, std::size_t batch_size) const {
  std::vector<std::size_t> order(users_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(std::span<std::size_t>(order), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto end = std::min(order.size(), start + batch_size);
    std::vector<Id> u;
    std::vector<Id> i;
    std::vector<Id> j;
    std::vector<double> y;
    for (auto k = start; k < end; ++k) {
      const auto r = order[k];
      u.push_back(users_[r]);
      i.push_back(items_[r]);
      if (pairwise_) {
        const auto seen = history_.of(users_[r]);
        Id neg = 0;
        do {
          neg = 1 + static_cast<Id>(uniform_below(rng, static_cast<std::uint64_t>(n_items_ - 1)));
        } while (std::binary_search(seen.begin(), seen.end(), neg));
        j.push_back(neg);
      } else {
        y.push_back(labels_[r]);
      }
    }
    Batch b;
    b.set(std::string(kUserColumn), std::move(u));
    b.set(std::string(kItemColumn), std::move(i));
    if (pairwise_) {
      b.set(std::string(kNegItemColumn), std::move(j));
    } else {
      b.set(std::string(kLabelColumn), std::move(y));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

SgdTrainer::SgdTrainer(Recommender& model, TrainingSampler sampler, const TrainConfig& config,
                       Rng rng, std::size_t epoch)
    : model_(model), sampler_(std::move(sampler)), config_(config), rng_(rng), epoch_(epoch) {
  config_.validate();
}

double SgdTrainer::run_epoch() {
  double total = 0.0;
  std::size_t rows = 0;
  for (const auto& batch : sampler_.epoch(rng_, config_.batch_size)) {
    total += model_.train_step(batch, config_.learning_rate) * static_cast<double>(batch.size());
    rows += batch.size();
  }
  ++epoch_;
  return total / static_cast<double>(rows);
}

ModelState SgdTrainer::snapshot() const {
  auto s = model_.state();
  s.epoch = epoch_;
  s.rng_state = rng_state(rng_);
  return s;
}

namespace {

ModelState train(Recommender& model, const Dataset& ds, const SplitResult& split,
                 const TrainConfig& config) {
  SgdTrainer trainer(model, TrainingSampler(ds, split.train, model.pairwise()), config,
                     sampler_rng(config.seed));
  for (std::size_t e = 0; e < config.epochs; ++e) trainer.run_epoch();
  return trainer.snapshot();
}

}  // namespace

ModelState train_bpr(const Dataset& ds, const SplitResult& split, const TrainConfig& config) {
  auto init = init_rng(config.seed);
  BprModel model(ds.n_users(), ds.n_items(), config, init);
  return train(model, ds, split, config);
}

ModelState train_fm(const Dataset& ds, const SplitResult& split, const TrainConfig& config) {
  auto init = init_rng(config.seed);
  FmModel model(FmFeatureSpace::from_dataset(ds), ds.n_users(), ds.n_items(), config, init);
  return train(model, ds, split, config);
}

bool is_known_model(std::string_view kind) {
  return kind == "pop" || kind == "itemknn" || kind == "ease" || kind == "bpr" || kind == "fm";
}

std::unique_ptr<Recommender> make_model(const ModelSpec& spec, const Dataset& ds,
                                        const SplitResult& split, const TrainConfig& config) {
  if (spec.kind == "pop") {
    return std::make_unique<PopularityModel>(PopularityModel::fit(ds, split.train));
  }
  if (spec.kind == "itemknn") {
    return std::make_unique<ItemKnnModel>(
        ItemKnnModel::fit(ds, split.train, {spec.knn_k, spec.knn_shrink}));
  }
  if (spec.kind == "ease") {
    return std::make_unique<EaseModel>(EaseModel::fit(ds, split.train, spec.ease_l2));
  }
  auto init = init_rng(config.seed);
  if (spec.kind == "bpr") {
    return std::make_unique<BprModel>(ds.n_users(), ds.n_items(), config, init);
  }
  if (spec.kind == "fm") {
    return std::make_unique<FmModel>(FmFeatureSpace::from_dataset(ds), ds.n_users(), ds.n_items(),
                                     config, init);
  }
  throw ConfigError("unknown model '" + spec.kind + "', expected pop, itemknn, ease, bpr or fm");
}

std::unique_ptr<Recommender> restore_model(const ModelState& state) {
  if (state.kind == "pop") return std::make_unique<PopularityModel>(PopularityModel::from_state(state));
  if (state.kind == "itemknn") return std::make_unique<ItemKnnModel>(ItemKnnModel::from_state(state));
  if (state.kind == "ease") return std::make_unique<EaseModel>(EaseModel::from_state(state));
  if (state.kind == "bpr") return std::make_unique<BprModel>(BprModel::from_state(state));
  if (state.kind == "fm") return std::make_unique<FmModel>(FmModel::from_state(state));
  throw CheckpointError("unknown model kind '" + state.kind + "' in state");
}

}  // namespace recbench
