#pragma once

// Evaluation driver. The evaluator never sees a model or a dataset loader
// directly: scores come from a ScoreSource, hit matrices are gathered by a
// Collector, and metrics are looked up by name in a MetricRegister.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recbench/protocol.hpp"
#include "recbench/ranking.hpp"

namespace recbench {

struct ScoreSource {
  // Row-major users x n_items scores over the whole catalog.
  std::function<std::vector<double>(std::span<const Id> users)> full;
  // One score per (users[i], items[i]) pair.
  std::function<std::vector<double>(std::span<const Id> users, std::span<const Id> items)> pairs;
};

using MetricFunction = std::function<MetricValues(const HitMatrix&, std::size_t k)>;

class MetricRegister {
 public:
  // recall, precision, ndcg, mrr.
  static MetricRegister with_defaults();

  void add(std::string name, MetricFunction fn);
  bool contains(std::string_view name) const;
  // Throws ConfigError for unknown names.
  const MetricFunction& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, MetricFunction, std::less<>> metrics_;
};

// Concatenates hit-matrix blocks in user order.
class Collector {
 public:
  void add(const HitMatrix& block) { hits_.append(block); }
  const HitMatrix& hits() const { return hits_; }
  std::size_t users() const { return hits_.rows; }

 private:
  HitMatrix hits_;
};

struct MetricReport {
  std::string setting;
  std::string target;
  bool masked = true;
  std::size_t n_users = 0;
  std::size_t n_excluded = 0;
  // `metric@K` -> mean, in registration order.
  std::vector<std::pair<std::string, double>> values;

  // Throws ConfigError when absent.
  double value(std::string_view key) const;
  std::string to_text() const;
  // Flat key -> number object.
  std::string to_json() const;

  bool operator==(const MetricReport&) const = default;
};

struct EvalOptions {
  std::vector<std::string> metrics{"recall", "ndcg"};
  std::vector<std::size_t> ks{10};
  std::size_t batch_size = 256;
  // Full ranking only: hide each user's already-seen items.
  bool mask_history = true;
  std::size_t threads = 1;
};

// Computes every registered metric at every K from the collected hits.
MetricReport summarize(const HitMatrix& hits, const std::vector<std::string>& metrics,
                       const std::vector<std::size_t>& ks, const MetricRegister& reg);

// Runs reshape -> mask -> topk -> index over batches of users with target
// positives, then summarizes. Validation ranks against train history; test
// ranks against train + valid history. Items that are positives of the
// current target are never masked.
MetricReport evaluate(const ScoreSource& source, const Dataset& ds, const SplitResult& split,
                      const EvalPlan& plan, EvalTarget target, const EvalOptions& options,
                      const MetricRegister& reg = MetricRegister::with_defaults());

// Formats a double with the shortest round-trip representation.
std::string format_number(double value);

}  // namespace recbench
