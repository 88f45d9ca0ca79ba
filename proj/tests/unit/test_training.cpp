#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "recbench/error.hpp"
#include "recbench/hash.hpp"
#include "recbench/models/bpr.hpp"
#include "recbench/models/checkpoint.hpp"
#include "recbench/models/fm.hpp"
#include "recbench/models/trainer.hpp"
#include "support/fixtures.hpp"

using namespace recbench;

namespace {

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.interaction_count());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Skips the padding row, which no batch ever touches.
double trained_norm(const std::vector<double>& v, std::size_t dim) {
  return std::inner_product(v.begin() + static_cast<std::ptrdiff_t>(dim), v.end(),
                            v.begin() + static_cast<std::ptrdiff_t>(dim), 0.0);
}

const Dataset& planted() {
  static const Dataset ds = fixtures::make_dataset(fixtures::planted_rows(7, 500, 300));
  return ds;
}

Checkpoint sample_checkpoint() {
  TrainConfig cfg;
  cfg.embedding_dim = 4;
  auto init = init_rng(1);
  BprModel m(6, 9, cfg, init);
  Checkpoint c;
  c.state = m.state();
  c.state.epoch = 3;
  c.state.rng_state = rng_state(sampler_rng(1));
  c.config_hash = "00ff00ff00ff00ff";
  c.best_valid = 0.123456789;
  c.meta = {{"stalls", "1"}, {"best_epoch", "2"}};
  return c;
}

// Rewrites the trailing checksum so only the intended field is wrong.
void restamp(std::string& bytes) {
  Fnv1a h;
  h.update(bytes.data(), bytes.size() - 8);
  const auto sum = h.digest();
  for (int b = 0; b < 8; ++b) bytes[bytes.size() - 8 + b] = static_cast<char>((sum >> (8 * b)) & 0xff);
}

}  // namespace

TEST(Sampler, NegativesAvoidTrainItemsAndAreUniform) {
  const auto ds = fixtures::make_dataset({{"a", "i0"}, {"a", "i1"}, {"b", "i2"}, {"b", "i3"},
                                          {"b", "i4"}, {"c", "i5"}});
  const std::vector<std::size_t> train{0, 1};  // user a only
  TrainingSampler sampler(ds, train, true);
  Rng rng(3);
  std::map<Id, int> freq;
  for (int e = 0; e < 5000; ++e) {
    for (const auto& b : sampler.epoch(rng, 2)) {
      for (auto j : b.ids(std::string(kNegItemColumn))) ++freq[j];
    }
  }
  // Items 3..6 are eligible for a; 10000 draws, 2500 expected each.
  ASSERT_EQ(freq.size(), 4u);
  for (const auto& [item, n] : freq) {
    EXPECT_GE(item, 3);
    EXPECT_NEAR(n, 2500, 3 * std::sqrt(10000 * 0.25 * 0.75));
  }
}

TEST(Sampler, RejectsImpossibleInputs) {
  const auto ds = fixtures::make_dataset({{"a", "x"}, {"a", "y"}});
  EXPECT_THROW(TrainingSampler(ds, all_rows(ds), true), DataError);  // a has every item
  EXPECT_THROW(TrainingSampler(ds, std::vector<std::size_t>{}, true), DataError);
  EXPECT_THROW(TrainingSampler(ds, all_rows(ds), false), DataError);  // no label column
}

TEST(Bpr, LossStrictlyDecreasesOnPlantedData) {
  const auto& ds = planted();
  ASSERT_EQ(ds.interaction_count(), 7500u);
  TrainConfig cfg;
  auto init = init_rng(cfg.seed);
  BprModel m(ds.n_users(), ds.n_items(), cfg, init);
  SgdTrainer trainer(m, TrainingSampler(ds, all_rows(ds), true), cfg, sampler_rng(cfg.seed));
  double previous = trainer.run_epoch();
  for (int e = 2; e <= 5; ++e) {
    const double loss = trainer.run_epoch();
    EXPECT_LT(loss, previous) << "epoch " << e;
    previous = loss;
  }
}

TEST(Bpr, LargeL2ShrinksEmbeddingsEveryEpoch) {
  const auto& ds = planted();
  TrainConfig cfg;
  cfg.l2 = 1e3;
  cfg.learning_rate = 0.005;
  auto init = init_rng(cfg.seed);
  BprModel m(ds.n_users(), ds.n_items(), cfg, init);
  SgdTrainer trainer(m, TrainingSampler(ds, all_rows(ds), true), cfg, sampler_rng(cfg.seed));
  double users = trained_norm(m.user_embedding(), m.dim());
  double items = trained_norm(m.item_embedding(), m.dim());
  for (int e = 1; e <= 5; ++e) {
    trainer.run_epoch();
    const double u = trained_norm(m.user_embedding(), m.dim());
    const double i = trained_norm(m.item_embedding(), m.dim());
    EXPECT_LT(u, users) << "epoch " << e;
    EXPECT_LT(i, items) << "epoch " << e;
    users = u;
    items = i;
  }
}

TEST(Bpr, SinglePairPreferenceGrowsEveryEpoch) {
  // One training pair (a, x); y exists only as a negative. With d = 1 the
  // first-order change of x_ax - x_ay is lr * s * (2 p^2 + (q_x - q_y)^2) > 0.
  const auto ds = fixtures::make_dataset({{"a", "x"}, {"b", "y"}});
  const std::vector<std::size_t> train{0};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TrainConfig cfg;
    cfg.embedding_dim = 1;
    cfg.learning_rate = 1.0;
    cfg.batch_size = 1;
    auto init = init_rng(seed);
    BprModel m(ds.n_users(), ds.n_items(), cfg, init);
    SgdTrainer trainer(m, TrainingSampler(ds, train, true), cfg, sampler_rng(seed));
    const auto margin = [&] {
      return m.user_vector(1)[0] * (m.item_vector(1)[0] - m.item_vector(2)[0]);
    };
    double previous = margin();
    for (int e = 0; e < 10; ++e) {
      trainer.run_epoch();
      EXPECT_GT(margin(), previous) << "seed " << seed << " epoch " << e;
      previous = margin();
    }
  }
}

TEST(Training, DeterministicUnderSeed) {
  const auto ds = fixtures::random_dataset(2, 40, 30, 10);
  const auto split = split_dataset(ds, parse_eval_setting("RO_RS,full"));
  TrainConfig cfg;
  cfg.epochs = 3;
  EXPECT_EQ(train_bpr(ds, split, cfg), train_bpr(ds, split, cfg));
  auto other = cfg;
  other.seed = 7;
  EXPECT_NE(train_bpr(ds, split, cfg), train_bpr(ds, split, other));
}

TEST(Fm, TrainingLowersLogisticLoss) {
  // Label depends on the item only, so a linear term can fit it.
  std::string text = "user_id:token,item_id:token,label:float\n";
  Rng rng(4);
  for (int r = 0; r < 400; ++r) {
    const auto item = uniform_below(rng, 10);
    text += "u" + std::to_string(uniform_below(rng, 30)) + ",i" + std::to_string(item) + "," +
            (item < 5 ? "1" : "0") + "\n";
  }
  const auto ds = Dataset::build({parse_atomic_text(text, AtomicFileKind::inter), {}, {}, {}, {}, {}});
  TrainConfig cfg;
  cfg.embedding_dim = 4;
  cfg.learning_rate = 5.0;
  cfg.batch_size = 32;
  auto init = init_rng(cfg.seed);
  FmModel m(FmFeatureSpace::from_dataset(ds), ds.n_users(), ds.n_items(), cfg, init);
  SgdTrainer trainer(m, TrainingSampler(ds, all_rows(ds), false), cfg, sampler_rng(cfg.seed));
  const double first = trainer.run_epoch();
  double last = first;
  for (int e = 0; e < 9; ++e) last = trainer.run_epoch();
  EXPECT_LT(last, 0.5 * first);
  const auto split = split_dataset(ds, parse_eval_setting("RO_RS,full"));
  cfg.epochs = 2;
  EXPECT_EQ(train_fm(ds, split, cfg), train_fm(ds, split, cfg));
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto c = sample_checkpoint();
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(c)), c);
  auto no_best = c;
  no_best.best_valid.reset();
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(no_best)), no_best);

  const auto dir = fixtures::temp_dir("ckpt");
  save_checkpoint(c, dir / "a.ckpt");
  EXPECT_FALSE(std::filesystem::exists(dir / "a.ckpt.tmp"));
  const auto loaded = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(loaded, c);
  const auto original = restore_model(c.state);
  const auto restored = restore_model(loaded.state);
  const std::vector<Id> users{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(original->full_sort_predict(users), restored->full_sort_predict(users));
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
}

TEST(Checkpoint, CorruptionIsAlwaysDetected) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  for (std::size_t n = 0; n < bytes.size(); n += 7) {
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, n)), CheckpointError) << "truncated at " << n;
  }
  for (std::size_t pos = 0; pos < bytes.size(); pos += 5) {
    auto bad = bytes;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x5a);
    EXPECT_THROW(decode_checkpoint(bad), CheckpointError) << "flipped byte " << pos;
  }
  EXPECT_THROW(decode_checkpoint(bytes + "x"), CheckpointError);
}

TEST(Checkpoint, VersionMismatchIsReported) {
  auto bytes = encode_checkpoint(sample_checkpoint());
  const std::uint32_t future = kCheckpointVersion + 1;
  std::memcpy(bytes.data() + 8, &future, sizeof future);
  restamp(bytes);
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, ResumeMatchesUninterruptedTraining) {
  const auto ds = fixtures::random_dataset(5, 60, 40, 12);
  const auto rows = all_rows(ds);
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.batch_size = 32;

  auto init = init_rng(cfg.seed);
  BprModel straight(ds.n_users(), ds.n_items(), cfg, init);
  SgdTrainer a(straight, TrainingSampler(ds, rows, true), cfg, sampler_rng(cfg.seed));
  for (int e = 0; e < 10; ++e) a.run_epoch();

  auto init2 = init_rng(cfg.seed);
  BprModel first(ds.n_users(), ds.n_items(), cfg, init2);
  SgdTrainer b(first, TrainingSampler(ds, rows, true), cfg, sampler_rng(cfg.seed));
  for (int e = 0; e < 3; ++e) b.run_epoch();
  const auto dir = fixtures::temp_dir("resume");
  Checkpoint c;
  c.state = b.snapshot();
  save_checkpoint(c, dir / "latest.ckpt");

  const auto loaded = load_checkpoint(dir / "latest.ckpt").state;
  ASSERT_EQ(loaded.epoch, 3u);
  auto second = BprModel::from_state(loaded);
  SgdTrainer resumed(second, TrainingSampler(ds, rows, true), cfg, rng_from_state(loaded.rng_state),
                     loaded.epoch);
  for (int e = 0; e < 7; ++e) resumed.run_epoch();

  EXPECT_EQ(resumed.snapshot(), a.snapshot());
  EXPECT_EQ(second.user_embedding(), straight.user_embedding());
  EXPECT_EQ(second.item_embedding(), straight.item_embedding());
}
