#include "recbench/runner/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "recbench/error.hpp"
#include "recbench/random.hpp"

namespace recbench {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t SearchSpace::size() const {
  if (parameters.empty()) return 0;
  std::size_t n = 1;
  for (const auto& p : parameters) n *= p.values.size();
  return n;
}

SearchSpace parse_range_text(std::string_view text) {
  SearchSpace space;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected name=[v1,v2,...]", line_no);
    const std::string name(trim(line.substr(0, eq)));
    auto list = trim(line.substr(eq + 1));
    if (name.empty()) throw ParseError("missing parameter name", line_no);
    if (list.size() < 2 || list.front() != '[' || list.back() != ']') {
      throw ParseError("values of '" + name + "' must be written [v1,v2,...]", line_no);
    }
    if (find_key(name) == nullptr) throw ParseError("unknown parameter '" + name + "'", line_no);
    for (const auto& p : space.parameters) {
      if (p.name == name) throw ParseError("duplicate parameter '" + name + "'", line_no);
    }
    SearchParameter param{name, {}};
    list = list.substr(1, list.size() - 2);
    std::size_t pos = 0;
    while (true) {
      const auto comma = list.find(',', pos);
      const auto value = trim(list.substr(pos, comma == std::string_view::npos ? list.npos : comma - pos));
      if (value.empty()) throw ParseError("empty value for '" + name + "'", line_no);
      Config probe;
      try {
        probe.set(name, value);
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), line_no);
      }
      param.values.emplace_back(value);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    space.parameters.push_back(std::move(param));
  }
  if (space.parameters.empty()) throw ParseError("search space is empty", line_no);
  return space;
}

SearchSpace parse_range_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open range file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_range_text(buf.str());
}

std::string to_string(const Assignment& assignment) {
  std::string out;
  for (const auto& [k, v] : assignment) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

std::vector<Assignment> grid_assignments(const SearchSpace& space) {
  if (space.size() == 0) throw ConfigError("search space is empty");
  std::vector<Assignment> out;
  std::vector<std::size_t> idx(space.parameters.size(), 0);
  while (true) {
    Assignment a;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      a.emplace_back(space.parameters[p].name, space.parameters[p].values[idx[p]]);
    }
    out.push_back(std::move(a));
    std::size_t p = idx.size();
    while (p > 0) {
      --p;
      if (++idx[p] < space.parameters[p].values.size()) break;
      idx[p] = 0;
      if (p == 0) return out;
    }
  }
}

std::vector<Assignment> random_assignments(const SearchSpace& space, std::size_t n,
                                           std::uint64_t seed) {
  const auto total = space.size();
  if (total == 0) throw ConfigError("search space is empty");
  if (n == 0) throw ConfigError("random search needs at least one trial");
  Rng rng(seed);
  std::set<std::vector<std::size_t>> seen;
  std::vector<Assignment> out;
  while (out.size() < n) {
    std::vector<std::size_t> pick;
    for (const auto& p : space.parameters) {
      pick.push_back(static_cast<std::size_t>(uniform_below(rng, p.values.size())));
    }
    if (seen.size() < total && !seen.insert(pick).second) continue;
    Assignment a;
    for (std::size_t p = 0; p < pick.size(); ++p) {
      a.emplace_back(space.parameters[p].name, space.parameters[p].values[pick[p]]);
    }
    out.push_back(std::move(a));
  }
  return out;
}

TrialResult run_trial(const Config& base, const Assignment& assignment, std::size_t index) {
  Config cfg = base;
  for (const auto& [k, v] : assignment) cfg.set(k, v);
  cfg.set("output.dir", (base.output_dir() / ("trial_" + std::to_string(index))).string());
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto run = run_experiment(cfg);
  TrialResult t;
  t.index = index;
  t.assignment = assignment;
  t.best_valid = run.valid_report->value(cfg.get("eval.valid_metric"));
  t.test = *run.test_report;
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

void rank_trials(std::vector<TrialResult>& trials) {
  // NaN (no validation users) ranks last.
  const auto key = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  std::stable_sort(trials.begin(), trials.end(), [&](const auto& a, const auto& b) {
    const double x = key(a.best_valid);
    const double y = key(b.best_valid);
    if (x != y) return x > y;
    return a.index < b.index;
  });
}

std::vector<TrialResult> run_trials(const Config& base, const std::vector<Assignment>& assignments,
                                    std::size_t jobs, const TrialRunner& runner) {
  std::vector<TrialResult> results(assignments.size());
  const auto workers = std::min(std::max<std::size_t>(jobs, 1), assignments.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < assignments.size(); ++i) results[i] = runner(base, assignments[i], i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < assignments.size(); i = next++) {
          try {
            results[i] = runner(base, assignments[i], i);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  rank_trials(results);
  return results;
}

std::vector<TrialResult> grid_search(const Config& base, const SearchSpace& space,
                                     std::size_t jobs, const TrialRunner& runner) {
  return run_trials(base, grid_assignments(space), jobs, runner);
}

std::vector<TrialResult> random_search(const Config& base, const SearchSpace& space,
                                       std::size_t n_trials, std::uint64_t seed, std::size_t jobs,
                                       const TrialRunner& runner) {
  return run_trials(base, random_assignments(space, n_trials, seed), jobs, runner);
}

std::string format_trials(const std::vector<TrialResult>& ranked, const std::string& metric) {
  std::string out = "rank\ttrial\tvalid_" + metric;
  if (!ranked.empty()) {
    for (const auto& [k, v] : ranked.front().test.values) out += "\ttest_" + k;
  }
  out += "\tseconds\tassignment\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& t = ranked[r];
    out += std::to_string(r + 1) + "\t" + std::to_string(t.index) + "\t" +
           format_number(t.best_valid);
    for (const auto& [k, v] : t.test.values) out += "\t" + format_number(v);
    std::ostringstream secs;
    secs.precision(3);
    secs << std::fixed << t.seconds;
    out += "\t" + secs.str() + "\t" + to_string(t.assignment) + "\n";
  }
  return out;
}

}  // namespace recbench
