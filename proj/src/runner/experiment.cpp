#include "recbench/runner/experiment.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "recbench/error.hpp"
#include "recbench/models/trainer.hpp"

namespace recbench {
namespace {

class RunLog {
 public:
  explicit RunLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw IoError("cannot open run log " + path.string());
  }

  void line(const std::string& text) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    out_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << text << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string meta_or(const Checkpoint& ckpt, const std::string& key, const std::string& fallback) {
  const auto it = ckpt.meta.find(key);
  return it == ckpt.meta.end() ? fallback : it->second;
}

// Everything a training run needs after preprocessing.
struct Session {
  Config cfg;
  std::filesystem::path dir;
  PreparedData data;
  EvalOptions eval_options;
  std::string valid_metric;
  std::string hash;
  std::unique_ptr<RunLog> log;

  Session(Config c, std::filesystem::path d)
      : cfg(std::move(c)), dir(std::move(d)), data(prepare_data(cfg)) {
    eval_options = cfg.eval_options();
    valid_metric = cfg.get("eval.valid_metric");
    hash = cfg.hash();
    log = std::make_unique<RunLog>(dir / kRunLog);
  }

  MetricReport evaluate_on(const Recommender& model, EvalTarget target) const {
    return evaluate(score_source(model), data.dataset, data.split, data.plan, target, eval_options);
  }

  Checkpoint checkpoint(ModelState state, std::optional<double> best, std::size_t stalls,
                        std::size_t best_epoch, bool finished) const {
    Checkpoint c;
    c.state = std::move(state);
    c.config_hash = hash;
    c.best_valid = best;
    c.meta["config"] = cfg.serialize();
    c.meta["base_dir"] = cfg.base_dir.string();
    c.meta["stalls"] = std::to_string(stalls);
    c.meta["best_epoch"] = std::to_string(best_epoch);
    c.meta["finished"] = finished ? "1" : "0";
    return c;
  }
};

void finish(Session& s, RunResult& result) {
  const auto best = load_checkpoint(s.dir / kBestCheckpoint);
  const auto model = restore_model(best.state);
  const auto valid = s.evaluate_on(*model, EvalTarget::valid);
  const auto test = s.evaluate_on(*model, EvalTarget::test);
  write_file(s.dir / kReportText, report_text(test, s.cfg));
  write_file(s.dir / kReportJson, test.to_json());
  write_file(s.dir / kValidJson, valid.to_json());
  s.log->line("best epoch " + std::to_string(result.best_epoch) + ", test report written to " +
              (s.dir / kReportText).string());
  for (const auto& [k, v] : test.values) s.log->line("test " + k + " = " + format_number(v));
  result.finished = true;
  result.valid_report = valid;
  result.test_report = test;
  result.best_state = best.state;
  result.best_valid = best.best_valid;
}

void train_and_finish(Session& s, Recommender& model, SgdTrainer& trainer, EarlyStopping& stopper,
                      RunResult& result) {
  const auto tcfg = s.cfg.train_config();
  const auto interrupt_after = s.cfg.count("train.interrupt_after");
  LoopHooks hooks;
  hooks.train_epoch = [&] { return trainer.run_epoch(); };
  hooks.validate = [&] { return s.evaluate_on(model, EvalTarget::valid).value(s.valid_metric); };
  hooks.on_epoch_end = [&](const EpochRecord& rec, bool finished) {
    const auto snapshot = trainer.snapshot();
    if (rec.improved) {
      result.best_epoch = rec.epoch;
      save_checkpoint(s.checkpoint(snapshot, stopper.best(), 0, rec.epoch, true),
                      s.dir / kBestCheckpoint);
    }
    save_checkpoint(s.checkpoint(snapshot, stopper.best(), stopper.stalls(), result.best_epoch,
                                 finished),
                    s.dir / kLatestCheckpoint);
    s.log->line("epoch " + std::to_string(rec.epoch) + " loss " + format_number(rec.loss) + " " +
                s.valid_metric + " " + format_number(rec.valid) + (rec.improved ? " (best)" : ""));
  };
  result.exit = run_training_loop(trainer.epoch(), tcfg.epochs, interrupt_after, stopper, hooks,
                                  &result.history);
  result.epochs_run = trainer.epoch();
  if (result.exit == LoopExit::interrupted) {
    s.log->line("interrupted after epoch " + std::to_string(trainer.epoch()) +
                "; resume from " + (s.dir / kLatestCheckpoint).string());
    result.best_valid = stopper.best();
    return;
  }
  if (result.exit == LoopExit::early_stopped) {
    s.log->line("early stop: no improvement in " + std::to_string(tcfg.patience) + " epochs");
  }
  if (!std::filesystem::exists(s.dir / kBestCheckpoint)) {
    // No epoch ran; the initial parameters are the best we have.
    save_checkpoint(s.checkpoint(trainer.snapshot(), std::nullopt, 0, 0, true),
                    s.dir / kBestCheckpoint);
    save_checkpoint(s.checkpoint(trainer.snapshot(), std::nullopt, 0, 0, true),
                    s.dir / kLatestCheckpoint);
  }
  finish(s, result);
}

void log_start(Session& s, const std::string& what) {
  s.log->line(what + " config_hash=" + s.hash + " seed=" + s.cfg.get("seed"));
  for (const auto& [k, v] : s.cfg.values()) s.log->line("config " + k + ": " + v);
  for (const auto& line : s.data.log) s.log->line(line);
}

}  // namespace

PreparedData prepare_data(const Config& cfg) {
  PreparedData out{load_dataset(cfg.data_prefix(), cfg.parse_options(), cfg.dataset_fields()),
                   {}, cfg.eval_plan(), {}};
  auto& ds = out.dataset;
  out.log.push_back("loaded " + std::to_string(ds.interaction_count()) + " interactions from " +
                    cfg.data_prefix().string());
  bool filtered = false;
  for (const auto& step : cfg.text_list("filter.order")) {
    if (step == "value" && !cfg.get("filter.value").empty()) {
      const auto [field, predicate] = parse_field_predicate(cfg.get("filter.value"));
      ds = filter_by_field_value(ds, field, predicate);
      filtered = true;
      out.log.push_back("value filter " + cfg.get("filter.value") + " -> " +
                        std::to_string(ds.interaction_count()) + " interactions");
    }
    const auto min_user = cfg.count("filter.min_user_inter");
    const auto min_item = cfg.count("filter.min_item_inter");
    if (step == "inter" && (min_user > 0 || min_item > 0)) {
      ds = filter_by_inter_num(ds, min_user, min_item);
      filtered = true;
      out.log.push_back("interaction-count filter user>=" + std::to_string(min_user) +
                        " item>=" + std::to_string(min_item) + " -> " +
                        std::to_string(ds.interaction_count()) + " interactions");
    }
  }
  if (filtered) ds = remap_ids(ds);
  if (cfg.boolean("fill_nan")) {
    ds = fill_nan(ds);
    out.log.push_back("missing floats imputed");
  }
  if (!cfg.get("label.field").empty()) {
    ds = set_label_by_threshold(ds, cfg.get("label.field"), cfg.real("label.threshold"));
    out.log.push_back("label = " + cfg.get("label.field") +
                      " >= " + format_number(cfg.real("label.threshold")));
  }
  const auto fields = cfg.text_list("normalize.fields");
  if (!fields.empty()) ds = normalize(ds, fields);
  out.split = split_dataset(ds, out.plan);
  out.log.push_back("split " + out.plan.setting() + ": train " +
                    std::to_string(out.split.train.size()) + ", valid " +
                    std::to_string(out.split.valid.size()) + ", test " +
                    std::to_string(out.split.test.size()));
  return out;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw ConfigError("patience must be at least 1");
}

bool EarlyStopping::update(double value) {
  if (!best_ || value > *best_) {
    best_ = value;
    stalls_ = 0;
    return true;
  }
  ++stalls_;
  return false;
}

void EarlyStopping::restore(std::optional<double> best, std::size_t stalls) {
  best_ = best;
  stalls_ = stalls;
}

LoopExit run_training_loop(std::size_t start_epoch, std::size_t max_epochs,
                           std::size_t interrupt_after, EarlyStopping& stopper,
                           const LoopHooks& hooks, std::vector<EpochRecord>* history) {
  if (stopper.should_stop()) return LoopExit::early_stopped;
  for (auto epoch = start_epoch + 1; epoch <= max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = hooks.train_epoch();
    rec.valid = hooks.validate();
    rec.improved = stopper.update(rec.valid);
    const bool stop = stopper.should_stop();
    const bool finished = stop || epoch == max_epochs;
    if (history != nullptr) history->push_back(rec);
    if (hooks.on_epoch_end) hooks.on_epoch_end(rec, finished);
    if (stop) return LoopExit::early_stopped;
    if (!finished && interrupt_after != 0 && epoch == interrupt_after) return LoopExit::interrupted;
  }
  return LoopExit::max_epochs;
}

std::string report_text(const MetricReport& report, const Config& cfg) {
  return "# config_hash: " + cfg.hash() + "\n# seed: " + cfg.get("seed") + "\n# model: " +
         cfg.get("model") + "\n" + report.to_text();
}

RunResult run_experiment(const Config& cfg) {
  cfg.validate();
  const auto dir = cfg.output_dir();
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / kBestCheckpoint);
  std::filesystem::remove(dir / kLatestCheckpoint);
  Session s(cfg, dir);
  log_start(s, "run");
  RunResult result;
  result.dir = dir;
  result.config_hash = s.hash;

  const auto tcfg = cfg.train_config();
  auto model = make_model(cfg.model_spec(), s.data.dataset, s.data.split, tcfg);
  if (!model->iterative()) {
    const double valid = s.evaluate_on(*model, EvalTarget::valid).value(s.valid_metric);
    s.log->line(std::string(model->kind()) + " fitted in closed form; " + s.valid_metric + " " +
                format_number(valid));
    const auto ckpt = s.checkpoint(model->state(), valid, 0, 0, true);
    save_checkpoint(ckpt, dir / kBestCheckpoint);
    save_checkpoint(ckpt, dir / kLatestCheckpoint);
    finish(s, result);
    return result;
  }
  SgdTrainer trainer(*model, TrainingSampler(s.data.dataset, s.data.split.train, model->pairwise()),
                     tcfg, sampler_rng(tcfg.seed));
  EarlyStopping stopper(tcfg.patience);
  train_and_finish(s, *model, trainer, stopper, result);
  return result;
}

RunResult resume_experiment(const std::filesystem::path& checkpoint,
                            const std::optional<Config>& current, bool allow_mismatch) {
  const auto ckpt = load_checkpoint(checkpoint);
  const auto stored_text = meta_or(ckpt, "config", "");
  if (stored_text.empty()) throw CheckpointError("checkpoint carries no run configuration");
  Config cfg = current ? *current : config_from_text(stored_text, {}, meta_or(ckpt, "base_dir", ""));
  if (current && cfg.hash() != ckpt.config_hash) {
    if (!allow_mismatch) {
      throw ConfigError("config hash " + cfg.hash() + " does not match checkpoint hash " +
                        ckpt.config_hash + " (pass the override flag to resume anyway)");
    }
  }
  auto dir = checkpoint.parent_path();
  if (dir.empty()) dir = ".";
  cfg.set("output.dir", dir.string());
  cfg.set("train.interrupt_after", "0");

  Session s(cfg, dir);
  log_start(s, "resume from " + checkpoint.string() + " at epoch " +
                   std::to_string(ckpt.state.epoch));
  if (current && cfg.hash() != ckpt.config_hash) {
    s.log->line("warning: config hash differs from checkpoint hash " + ckpt.config_hash);
  }
  RunResult result;
  result.dir = dir;
  result.config_hash = s.hash;
  result.best_epoch = std::stoul(meta_or(ckpt, "best_epoch", "0"));
  result.epochs_run = ckpt.state.epoch;

  if (meta_or(ckpt, "finished", "0") == "1") {
    s.log->line("run already finished; re-emitting report");
    finish(s, result);
    return result;
  }
  auto model = restore_model(ckpt.state);
  if (model->n_users() != s.data.dataset.n_users() || model->n_items() != s.data.dataset.n_items()) {
    throw CheckpointError("checkpoint model does not fit the prepared dataset");
  }
  const auto tcfg = cfg.train_config();
  SgdTrainer trainer(*model, TrainingSampler(s.data.dataset, s.data.split.train, model->pairwise()),
                     tcfg, rng_from_state(ckpt.state.rng_state), ckpt.state.epoch);
  EarlyStopping stopper(tcfg.patience);
  stopper.restore(ckpt.best_valid, std::stoul(meta_or(ckpt, "stalls", "0")));
  train_and_finish(s, *model, trainer, stopper, result);
  return result;
}

}  // namespace recbench
