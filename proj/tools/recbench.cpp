// recbench command-line driver: convert, run, resume, tune, bench.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "recbench/atomic_io.hpp"
#include "recbench/error.hpp"
#include "recbench/runner/bench.hpp"
#include "recbench/runner/config.hpp"
#include "recbench/runner/experiment.hpp"
#include "recbench/runner/search.hpp"

namespace fs = std::filesystem;
using namespace recbench;

namespace {

char separator_arg(const std::string& s) {
  if (s == "tab" || s == "\\t") return '\t';
  if (s.size() != 1) throw ConfigError("separator must be one character or `tab`");
  return s[0];
}

void print_run(const RunResult& r) {
  if (!r.finished) {
    std::cout << "interrupted after epoch " << r.epochs_run << "; resume with --checkpoint "
              << (r.dir / kLatestCheckpoint).string() << "\n";
    return;
  }
  std::cout << r.test_report->to_text();
  std::cout << "report: " << (r.dir / kReportText).string() << "\n";
}

Config config_with(const std::string& file, std::vector<std::string> sets,
                   const std::string& eval_setting, const std::string& seed,
                   const std::string& output) {
  if (!eval_setting.empty()) sets.push_back("eval.setting=" + eval_setting);
  if (!seed.empty()) sets.push_back("seed=" + seed);
  if (!output.empty()) sets.push_back("output.dir=" + output);
  return load_config(file.empty() ? std::nullopt : std::optional<fs::path>(file), sets);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recbench: recommender benchmarking engine"};
  app.require_subcommand(1);

  auto* convert = app.add_subcommand("convert", "convert a headered CSV into an atomic file");
  std::string conv_in, conv_out, conv_map, conv_kind, conv_in_sep = ",", conv_out_sep = ",";
  convert->add_option("--input", conv_in, "source file")->required();
  convert->add_option("--output", conv_out, "atomic file to write, e.g. data/ml.inter")->required();
  convert->add_option("--map", conv_map, "column mapping, e.g. userId=user_id:token")->required();
  convert->add_option("--kind", conv_kind, "atomic kind (default: output suffix)");
  convert->add_option("--in-sep", conv_in_sep, "source separator");
  convert->add_option("--out-sep", conv_out_sep, "atomic file separator");

  auto* run = app.add_subcommand("run", "preprocess, split, train and evaluate");
  std::string run_config, run_eval, run_seed, run_output;
  std::vector<std::string> run_sets;
  run->add_option("--config", run_config, "config file");
  run->add_option("--set", run_sets, "key=value override (repeatable)");
  run->add_option("--eval-setting", run_eval, "e.g. RO_RS,full or TO_LS,uni100");
  run->add_option("--seed", run_seed, "seed");
  run->add_option("--output", run_output, "run directory");

  auto* resume = app.add_subcommand("resume", "continue a run from its latest checkpoint");
  std::string res_ckpt, res_config;
  std::vector<std::string> res_sets;
  bool res_force = false;
  resume->add_option("--checkpoint", res_ckpt, "latest.ckpt of the run")->required();
  resume->add_option("--config", res_config, "current config to check against the checkpoint");
  resume->add_option("--set", res_sets, "key=value override (repeatable)");
  resume->add_flag("--force", res_force, "resume even if the config hash differs");

  auto* tune = app.add_subcommand("tune", "grid or random hyperparameter search");
  std::string tune_config, tune_space, tune_method = "grid", tune_output;
  std::vector<std::string> tune_sets;
  std::size_t tune_trials = 10, tune_jobs = 1;
  std::uint64_t tune_seed = 2020;
  tune->add_option("--config", tune_config, "config file")->required();
  tune->add_option("--space", tune_space, "range file of name=[v1,v2,...] lines")->required();
  tune->add_option("--method", tune_method, "grid or random")
      ->check(CLI::IsMember({"grid", "random"}));
  tune->add_option("--trials", tune_trials, "random-search trials");
  tune->add_option("--search-seed", tune_seed, "random-search seed");
  tune->add_option("--jobs", tune_jobs, "trials run concurrently");
  tune->add_option("--set", tune_sets, "key=value override (repeatable)");
  tune->add_option("--output", tune_output, "search directory");

  auto* bench = app.add_subcommand("bench", "time accelerated vs naive full-ranking evaluation");
  BenchOptions bench_opts;
  bench->add_option("--users", bench_opts.users, "users");
  bench->add_option("--items", bench_opts.items, "items");
  bench->add_option("--k", bench_opts.k, "cut-off");
  bench->add_option("--repeats", bench_opts.repeats, "timed runs per path");
  bench->add_option("--seed", bench_opts.seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (convert->parsed()) {
      const fs::path out(conv_out);
      const auto kind = parse_file_kind(conv_kind.empty() ? out.extension().string().substr(1)
                                                          : conv_kind);
      const auto table = convert_csv(conv_in, parse_column_mapping(conv_map), kind,
                                     separator_arg(conv_in_sep));
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_atomic_file(table, out, separator_arg(conv_out_sep));
      std::cout << "wrote " << table.row_count() << " rows to " << out.string() << "\n";
    } else if (run->parsed()) {
      print_run(run_experiment(config_with(run_config, run_sets, run_eval, run_seed, run_output)));
    } else if (resume->parsed()) {
      std::optional<Config> current;
      if (!res_config.empty() || !res_sets.empty()) {
        current = config_with(res_config, res_sets, "", "", "");
      }
      print_run(resume_experiment(res_ckpt, current, res_force));
    } else if (tune->parsed()) {
      const auto cfg = config_with(tune_config, tune_sets, "", "", tune_output);
      const auto space = parse_range_file(tune_space);
      const auto trials = tune_method == "grid"
                              ? grid_search(cfg, space, tune_jobs)
                              : random_search(cfg, space, tune_trials, tune_seed, tune_jobs);
      const auto table = format_trials(trials, cfg.get("eval.valid_metric"));
      fs::create_directories(cfg.output_dir());
      std::ofstream(cfg.output_dir() / "trials.tsv") << table;
      std::cout << table;
      std::cout << "best: trial " << trials.front().index << " " << to_string(trials.front().assignment)
                << "\n";
    } else if (bench->parsed()) {
      const auto result = bench_eval(bench_opts);
      std::cout << format_bench(bench_opts, result);
      if (!result.identical) throw DataError("accelerated and naive reports differ");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
