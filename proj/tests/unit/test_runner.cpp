#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "recbench/error.hpp"
#include "recbench/models/checkpoint.hpp"
#include "recbench/runner/config.hpp"
#include "recbench/runner/experiment.hpp"
#include "recbench/runner/search.hpp"
#include "support/fixtures.hpp"

using namespace recbench;

namespace {

const std::filesystem::path kToyConfig = std::filesystem::path(RECBENCH_TEST_DATA_DIR) / "toy" / "toy.conf";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Config toy_config(const std::filesystem::path& out, std::vector<std::string> extra = {}) {
  extra.push_back("output.dir=" + out.string());
  return load_config(kToyConfig, extra);
}

// Small BPR experiment on a random dataset written to disk.
Config bpr_config(const std::filesystem::path& root, const std::string& out_name) {
  const auto data = root / "data" / "rand";
  if (!std::filesystem::exists(data.string() + ".inter")) {
    std::vector<fixtures::Row> rows;
    const auto ds = fixtures::random_dataset(21, 40, 30, 10);
    const auto raw = ds.decode(ds.inter());
    const auto& u = std::get<TokenColumn>(raw.column("user_id"));
    const auto& i = std::get<TokenColumn>(raw.column("item_id"));
    const auto& t = std::get<FloatColumn>(raw.column("timestamp"));
    for (std::size_t r = 0; r < raw.row_count(); ++r) rows.push_back({*u[r], *i[r], *t[r]});
    fixtures::write_inter_file(rows, data.string() + ".inter");
  }
  return config_from_text("data.path: " + data.string() +
                              "\nmodel: bpr\neval.setting: RO_RS,full\ntrain.epochs: 8\n"
                              "train.patience: 100\ntrain.embedding_dim: 8\ntrain.batch_size: 64\n"
                              "eval.valid_metric: ndcg@10\n",
                          {"output.dir=" + (root / out_name).string()});
}

}  // namespace

TEST(Config, PrecedenceDefaultsFileOverrides) {
  const auto dir = fixtures::temp_dir("config_prec");
  {
    std::ofstream f(dir / "a.conf");
    f << "# comment\n\ndata.path: x\ntrain.lr: 0.5\nseed: 1\n";
  }
  const auto cfg = load_config(dir / "a.conf", {"seed=9"});
  EXPECT_EQ(cfg.real("train.lr"), 0.5);        // file over default
  EXPECT_EQ(cfg.integer("seed"), 9);           // override over file
  EXPECT_EQ(cfg.count("train.patience"), 3u);  // default
  EXPECT_EQ(cfg.data_prefix(), dir / "x");     // relative to the config file
  EXPECT_EQ(cfg.output_dir(), std::filesystem::path("output"));
}

TEST(Config, ErrorsNameTheProblem) {
  try {
    config_from_text("data.path: x\ntrain.lrr: 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.lrr"), std::string::npos);
  }
  try {
    config_from_text("model: bpr\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("data.path"), std::string::npos);
  }
  EXPECT_THROW(config_from_text("data.path: x\ntrain.epochs: many\n"), ConfigError);
  EXPECT_THROW(config_from_text("data.path: x\neval.valid_metric: mrr@10\n"), ConfigError);
  EXPECT_THROW(config_from_text("data.path: x\n", {"seed"}), ConfigError);
  try {
    parse_config_text("a: 1\nno colon here\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Config, HashIgnoresOutputAndInterruption) {
  const auto a = config_from_text("data.path: x\n");
  const auto b = config_from_text("data.path: x\n", {"output.dir=elsewhere", "train.interrupt_after=2",
                                                    "eval.threads=4"});
  const auto c = config_from_text("data.path: x\n", {"seed=1"});
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  // Serialization round-trips.
  EXPECT_EQ(config_from_text(c.serialize()).serialize(), c.serialize());
}

TEST(EarlyStopping, ScriptedValidationCurve) {
  // Patience 2: best at 1, 2, 4; stalls at 3, 5, 6 -> stop after epoch 6.
  const std::vector<double> curve{0.1, 0.2, 0.2, 0.3, 0.25, 0.25, 0.4, 0.5};
  EarlyStopping stopper(2);
  std::size_t epoch = 0;
  std::vector<std::pair<std::size_t, bool>> ends;
  LoopHooks hooks;
  hooks.train_epoch = [&] { return 1.0 / static_cast<double>(++epoch); };
  hooks.validate = [&] { return curve[epoch - 1]; };
  hooks.on_epoch_end = [&](const EpochRecord& rec, bool finished) {
    ends.emplace_back(rec.epoch, finished);
  };
  std::vector<EpochRecord> history;
  const auto exit = run_training_loop(0, 8, 0, stopper, hooks, &history);
  EXPECT_EQ(exit, LoopExit::early_stopped);
  ASSERT_EQ(history.size(), 6u);
  const std::vector<bool> improved{true, true, false, true, false, false};
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(history[k].improved, improved[k]) << k;
  EXPECT_EQ(stopper.best(), 0.3);
  EXPECT_TRUE(ends.back().second);
  EXPECT_FALSE(ends.front().second);

  // Interruption stops after the named epoch without finishing.
  EarlyStopping fresh(2);
  epoch = 0;
  ends.clear();
  EXPECT_EQ(run_training_loop(0, 8, 3, fresh, hooks), LoopExit::interrupted);
  EXPECT_EQ(ends.size(), 3u);
  EXPECT_FALSE(ends.back().second);
  EXPECT_THROW(EarlyStopping(0), ConfigError);
}

TEST(Experiment, ToyPopularityReport) {
  const auto dir = fixtures::temp_dir("toy_run");
  const auto result = run_experiment(toy_config(dir / "a"));
  ASSERT_TRUE(result.finished);
  ASSERT_TRUE(result.test_report.has_value());
  // u1 -> i4 hit, u2 -> i2 miss, u3 -> i3 miss.
  EXPECT_NEAR(result.test_report->value("recall@1"), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(result.test_report->value("precision@1"), 1.0 / 3.0, 1e-12);
  for (const char* f : {kBestCheckpoint, kLatestCheckpoint, kReportText, kReportJson, kValidJson, kRunLog}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
  }
  const auto text = read_file(dir / "a" / kReportText);
  EXPECT_NE(text.find("# config_hash: " + result.config_hash), std::string::npos);
  EXPECT_NE(text.find("# seed: 2020"), std::string::npos);
}

TEST(Experiment, RepeatedRunsAreByteIdentical) {
  const auto dir = fixtures::temp_dir("repeat");
  for (const auto& name : {"x", "y"}) run_experiment(bpr_config(dir, name));
  for (const char* f : {kReportText, kReportJson, kValidJson}) {
    EXPECT_EQ(read_file(dir / "x" / f), read_file(dir / "y" / f)) << f;
  }
  EXPECT_EQ(load_checkpoint(dir / "x" / kBestCheckpoint).state,
            load_checkpoint(dir / "y" / kBestCheckpoint).state);
}

TEST(Experiment, InterruptedRunResumesToTheSameResult) {
  const auto dir = fixtures::temp_dir("resume_run");
  const auto straight = run_experiment(bpr_config(dir, "straight"));
  auto cut = bpr_config(dir, "cut");
  cut.set("train.interrupt_after", "3");
  const auto partial = run_experiment(cut);
  EXPECT_FALSE(partial.finished);
  EXPECT_EQ(partial.exit, LoopExit::interrupted);
  EXPECT_FALSE(std::filesystem::exists(dir / "cut" / kReportText));
  EXPECT_EQ(load_checkpoint(dir / "cut" / kLatestCheckpoint).state.epoch, 3u);

  const auto resumed = resume_experiment(dir / "cut" / kLatestCheckpoint);
  ASSERT_TRUE(resumed.finished);
  EXPECT_EQ(resumed.best_state, straight.best_state);
  EXPECT_EQ(read_file(dir / "cut" / kReportText), read_file(dir / "straight" / kReportText));
  EXPECT_EQ(read_file(dir / "cut" / kReportJson), read_file(dir / "straight" / kReportJson));
  EXPECT_EQ(load_checkpoint(dir / "cut" / kLatestCheckpoint).state,
            load_checkpoint(dir / "straight" / kLatestCheckpoint).state);

  // A finished run is not retrained.
  const auto before = read_file(dir / "cut" / kLatestCheckpoint);
  const auto again = resume_experiment(dir / "cut" / kLatestCheckpoint);
  EXPECT_TRUE(again.finished);
  EXPECT_TRUE(again.history.empty());
  EXPECT_EQ(read_file(dir / "cut" / kLatestCheckpoint), before);
  EXPECT_EQ(read_file(dir / "cut" / kReportText), read_file(dir / "straight" / kReportText));
}

TEST(Experiment, ResumeRejectsADifferentConfig) {
  const auto dir = fixtures::temp_dir("resume_mismatch");
  auto cut = bpr_config(dir, "cut");
  cut.set("train.interrupt_after", "2");
  run_experiment(cut);
  auto changed = bpr_config(dir, "cut");
  changed.set("train.l2", "0.5");
  EXPECT_THROW(resume_experiment(dir / "cut" / kLatestCheckpoint, changed), ConfigError);
  const auto forced = resume_experiment(dir / "cut" / kLatestCheckpoint, changed, true);
  EXPECT_TRUE(forced.finished);
  EXPECT_THROW(resume_experiment(dir / "nothing.ckpt"), IoError);
}

TEST(Search, RangeFileParsing) {
  const auto space = parse_range_text("# grid\ntrain.lr=[0.1, 1]\n\nmodel.k=[5,10,20]\n");
  ASSERT_EQ(space.parameters.size(), 2u);
  EXPECT_EQ(space.size(), 6u);
  EXPECT_EQ(space.parameters[0].values, (std::vector<std::string>{"0.1", "1"}));
  const auto expect_line = [](const std::string& text, std::size_t line) {
    try {
      parse_range_text(text);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  };
  expect_line("train.lr=[0.1]\ntrain.lr=[1]\n", 2);    // duplicate
  expect_line("train.lr=[0.1]\nnot.a.key=[1]\n", 2);   // unknown
  expect_line("train.lr=[fast]\n", 1);                 // wrong type
  expect_line("train.lr=0.1\n", 1);                    // no brackets
  expect_line("train.lr=[]\n", 1);                     // empty list
  EXPECT_THROW(parse_range_text("# nothing\n"), ParseError);
}

TEST(Search, GridAssignmentsEnumerateTheProduct) {
  const auto space = parse_range_text("train.lr=[1,2]\nmodel.k=[5,6,7]\n");
  const auto grid = grid_assignments(space);
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(to_string(grid[0]), "train.lr=1 model.k=5");
  EXPECT_EQ(to_string(grid[1]), "train.lr=1 model.k=6");
  EXPECT_EQ(to_string(grid[5]), "train.lr=2 model.k=7");
  std::set<std::string> distinct;
  for (const auto& a : grid) distinct.insert(to_string(a));
  EXPECT_EQ(distinct.size(), 6u);
}

TEST(Search, GridSearchFindsTheBestTrial) {
  const auto dir = fixtures::temp_dir("grid");
  auto base = toy_config(dir);
  base.set("model", "itemknn");
  const auto space = parse_range_text("model.k=[1,3]\nmodel.shrink=[0,5]\n");
  const auto ranked = grid_search(base, space);
  ASSERT_EQ(ranked.size(), 4u);
  double best = -1;
  std::set<std::size_t> indices;
  for (const auto& t : ranked) {
    best = std::max(best, t.best_valid);
    indices.insert(t.index);
    EXPECT_TRUE(std::filesystem::exists(dir / ("trial_" + std::to_string(t.index)) / kReportText));
  }
  EXPECT_EQ(indices.size(), 4u);
  EXPECT_EQ(ranked.front().best_valid, best);
  for (std::size_t k = 1; k < ranked.size(); ++k) {
    EXPECT_GE(ranked[k - 1].best_valid, ranked[k].best_valid);
    if (ranked[k - 1].best_valid == ranked[k].best_valid) EXPECT_LT(ranked[k - 1].index, ranked[k].index);
  }
  // Parallel trials give the same ranking.
  const auto parallel = grid_search(base, space, 2);
  ASSERT_EQ(parallel.size(), ranked.size());
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    EXPECT_EQ(parallel[k].index, ranked[k].index);
    EXPECT_EQ(parallel[k].best_valid, ranked[k].best_valid);
    EXPECT_EQ(parallel[k].test, ranked[k].test);
  }
  const auto table = format_trials(ranked, "recall@1");
  EXPECT_NE(table.find("model.k="), std::string::npos);
}

TEST(Search, RankingPutsNanLastAndBreaksTiesByIndex) {
  std::vector<TrialResult> trials(4);
  const double values[] = {0.5, std::nan(""), 0.7, 0.5};
  for (std::size_t k = 0; k < 4; ++k) {
    trials[k].index = k;
    trials[k].best_valid = values[k];
  }
  rank_trials(trials);
  EXPECT_EQ(trials[0].index, 2u);
  EXPECT_EQ(trials[1].index, 0u);
  EXPECT_EQ(trials[2].index, 3u);
  EXPECT_EQ(trials[3].index, 1u);
}

TEST(Search, RandomDrawsAreSeededCoveringAndUniform) {
  const auto space = parse_range_text("train.lr=[1,2,3]\nmodel.k=[5,6]\n");
  EXPECT_EQ(to_string(random_assignments(space, 4, 11)[2]), to_string(random_assignments(space, 4, 11)[2]));
  // Asking for the whole space returns every combination once.
  const auto all = random_assignments(space, 6, 3);
  std::set<std::string> distinct;
  for (const auto& a : all) distinct.insert(to_string(a));
  EXPECT_EQ(distinct.size(), 6u);
  // More trials than combinations: repeats only once the space is covered.
  const auto more = random_assignments(space, 8, 3);
  distinct.clear();
  for (std::size_t k = 0; k < 6; ++k) distinct.insert(to_string(more[k]));
  EXPECT_EQ(distinct.size(), 6u);

  // First draw over many seeds is uniform over the 6 combinations.
  std::map<std::string, int> freq;
  const int n = 6000;
  for (int s = 0; s < n; ++s) ++freq[to_string(random_assignments(space, 1, static_cast<std::uint64_t>(s))[0])];
  ASSERT_EQ(freq.size(), 6u);
  const double sigma = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
  for (const auto& [k, c] : freq) EXPECT_NEAR(c, n / 6.0, 3 * sigma) << k;
}

TEST(Search, RandomSearchUsesTheInjectedRunner) {
  const auto dir = fixtures::temp_dir("random_fake");
  const auto base = toy_config(dir);
  const auto space = parse_range_text("train.lr=[1,2,3,4]\n");
  std::vector<std::string> seen;
  std::mutex m;
  const TrialRunner fake = [&](const Config&, const Assignment& a, std::size_t index) {
    const std::lock_guard lock(m);
    seen.push_back(to_string(a));
    TrialResult r;
    r.index = index;
    r.assignment = a;
    r.best_valid = std::stod(a[0].second);
    return r;
  };
  const auto ranked = random_search(base, space, 3, 5, 1, fake);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(seen.size(), 3u);
  EXPECT_GE(ranked[0].best_valid, ranked[1].best_valid);
  const auto again = random_search(base, space, 3, 5, 1, fake);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(to_string(again[k].assignment), to_string(ranked[k].assignment));
}
