#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "recbench/runner/experiment.hpp"

namespace recbench {

struct SearchParameter {
  std::string name;
  std::vector<std::string> values;
};

struct SearchSpace {
  std::vector<SearchParameter> parameters;

  // Size of the Cartesian product.
  std::size_t size() const;
};

// One `name=[v1,v2,...]` per line; blank lines and # comments skipped.
// Values are type-checked against the config key. Throws ParseError (with
// the line number) on syntax errors, unknown parameters, bad values or
// duplicate names, and on an empty space.
SearchSpace parse_range_text(std::string_view text);
SearchSpace parse_range_file(const std::filesystem::path& path);

using Assignment = std::vector<std::pair<std::string, std::string>>;

std::string to_string(const Assignment& assignment);

// Cartesian product, last parameter varying fastest.
std::vector<Assignment> grid_assignments(const SearchSpace& space);
// `n` seeded uniform draws; a draw that repeats an earlier one is redrawn
// while unseen combinations remain.
std::vector<Assignment> random_assignments(const SearchSpace& space, std::size_t n,
                                           std::uint64_t seed);

struct TrialResult {
  std::size_t index = 0;
  Assignment assignment;
  double best_valid = 0.0;
  MetricReport test;
  double seconds = 0.0;
};

// Runs one trial; the default applies the assignment to the config, puts
// the run in `<output.dir>/trial_<index>` and calls run_experiment.
using TrialRunner = std::function<TrialResult(const Config& base, const Assignment&, std::size_t)>;

TrialResult run_trial(const Config& base, const Assignment& assignment, std::size_t index);

// Descending best_valid; ties keep the lower trial index first.
void rank_trials(std::vector<TrialResult>& trials);

// Every trial runs with the config's seed, so a trial's result depends only
// on its assignment; `jobs` > 1 runs trials concurrently.
std::vector<TrialResult> run_trials(const Config& base, const std::vector<Assignment>& assignments,
                                    std::size_t jobs = 1, const TrialRunner& runner = run_trial);

std::vector<TrialResult> grid_search(const Config& base, const SearchSpace& space,
                                     std::size_t jobs = 1, const TrialRunner& runner = run_trial);
std::vector<TrialResult> random_search(const Config& base, const SearchSpace& space,
                                       std::size_t n_trials, std::uint64_t seed,
                                       std::size_t jobs = 1,
                                       const TrialRunner& runner = run_trial);

// Tab-separated summary, best first.
std::string format_trials(const std::vector<TrialResult>& ranked, const std::string& metric);

}  // namespace recbench
