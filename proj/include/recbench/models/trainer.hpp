#pragma once

#include <memory>

#include "recbench/models/recommender.hpp"
#include "recbench/protocol.hpp"
#include "recbench/random.hpp"

namespace recbench {

// Builds the per-epoch training batches. Pairwise: train rows in shuffled
// order, each with one negative drawn uniformly from the items the user has
// no train interaction with. Pointwise: shuffled (user, item, label) rows.
class TrainingSampler {
 public:
  // Throws DataError on an empty train split, a user who has interacted
  // with every item (pairwise), or a missing / incomplete label column
  // (pointwise).
  TrainingSampler(const Dataset& ds, std::span<const std::size_t> train_rows, bool pairwise);

  std::vector<Batch> epoch(Rng& rng, std::size_t batch_size) const;
  std::size_t rows() const { return users_.size(); }

 private:
  bool pairwise_;
  Id n_items_;
  std::vector<Id> users_;
  std::vector<Id> items_;
  std::vector<double> labels_;
  UserHistory history_;
};

// Plain mini-batch SGD over sampler epochs.
class SgdTrainer {
 public:
  SgdTrainer(Recommender& model, TrainingSampler sampler, const TrainConfig& config, Rng rng,
             std::size_t epoch = 0);

  // Runs one epoch and returns the row-weighted mean of the pre-step batch
  // objectives.
  double run_epoch();
  std::size_t epoch() const { return epoch_; }
  const Rng& rng() const { return rng_; }
  // Model state stamped with the epoch counter and sampler RNG.
  ModelState snapshot() const;

 private:
  Recommender& model_;
  TrainingSampler sampler_;
  TrainConfig config_;
  Rng rng_;
  std::size_t epoch_;
};

// Random streams: model initialization and epoch sampling.
inline Rng init_rng(std::uint64_t seed) { return Rng(derive_seed(seed, 0)); }
inline Rng sampler_rng(std::uint64_t seed) { return Rng(derive_seed(seed, 1)); }

// Trains for config.epochs epochs without validation.
ModelState train_bpr(const Dataset& ds, const SplitResult& split, const TrainConfig& config);
ModelState train_fm(const Dataset& ds, const SplitResult& split, const TrainConfig& config);

struct ModelSpec {
  std::string kind = "bpr";
  std::size_t knn_k = 100;
  double knn_shrink = 0.0;
  double ease_l2 = 500.0;
};

// Closed-form models come back fitted; iterative ones freshly initialized.
std::unique_ptr<Recommender> make_model(const ModelSpec& spec, const Dataset& ds,
                                        const SplitResult& split, const TrainConfig& config);
std::unique_ptr<Recommender> restore_model(const ModelState& state);

bool is_known_model(std::string_view kind);

}  // namespace recbench
