#include "recbench/evaluator.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <exception>
#include <iterator>
#include <mutex>
#include <thread>

#include "recbench/error.hpp"

namespace recbench {
namespace {

std::vector<Id> minus(const std::vector<Id>& a, const std::vector<Id>& b) {
  std::vector<Id> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<Id> merged(const std::vector<Id>& a, const std::vector<Id>& b) {
  std::vector<Id> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

MetricRegister MetricRegister::with_defaults() {
  MetricRegister reg;
  reg.add("recall", recall_at_k);
  reg.add("precision", precision_at_k);
  reg.add("ndcg", ndcg_at_k);
  reg.add("mrr", mrr_at_k);
  return reg;
}

void MetricRegister::add(std::string name, MetricFunction fn) {
  metrics_.insert_or_assign(std::move(name), std::move(fn));
}

bool MetricRegister::contains(std::string_view name) const {
  return metrics_.find(name) != metrics_.end();
}

const MetricFunction& MetricRegister::get(std::string_view name) const {
  const auto it = metrics_.find(name);
  if (it == metrics_.end()) throw ConfigError("unknown metric '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> MetricRegister::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : metrics_) out.push_back(name);
  return out;
}

double MetricReport::value(std::string_view key) const {
  for (const auto& [name, v] : values) {
    if (name == key) return v;
  }
  throw ConfigError("report has no value '" + std::string(key) + "'");
}

std::string MetricReport::to_text() const {
  std::string out;
  out += "# setting: " + setting + "\n";
  out += "# target: " + target + "\n";
  out += std::string("# masking: ") + (masked ? "on" : "off") + "\n";
  out += "# users: " + std::to_string(n_users) + " (excluded without positives: " +
         std::to_string(n_excluded) + ")\n";
  std::size_t width = 6;
  for (const auto& [name, v] : values) width = std::max(width, name.size());
  const auto pad = [&](const std::string& s) { return s + std::string(width + 2 - s.size(), ' '); };
  out += pad("metric") + "value\n";
  for (const auto& [name, v] : values) out += pad(name) + format_number(v) + "\n";
  return out;
}

std::string MetricReport::to_json() const {
  std::string out = "{\n";
  std::vector<std::pair<std::string, double>> entries = values;
  entries.emplace_back("n_users", static_cast<double>(n_users));
  entries.emplace_back("n_excluded_users", static_cast<double>(n_excluded));
  entries.emplace_back("mask_history", masked ? 1.0 : 0.0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += "  \"" + entries[i].first + "\": " + format_number(entries[i].second);
    out += i + 1 < entries.size() ? ",\n" : "\n";
  }
  out += "}\n";
  return out;
}

MetricReport summarize(const HitMatrix& hits, const std::vector<std::string>& metrics,
                       const std::vector<std::size_t>& ks, const MetricRegister& reg) {
  MetricReport report;
  report.n_users = hits.rows;
  report.n_excluded = static_cast<std::size_t>(
      std::count_if(hits.pos_counts.begin(), hits.pos_counts.end(), [](auto c) { return c <= 0; }));
  for (const auto& name : metrics) {
    const auto& fn = reg.get(name);
    for (auto k : ks) {
      report.values.emplace_back(name + "@" + std::to_string(k), fn(hits, k).mean);
    }
  }
  return report;
}

MetricReport evaluate(const ScoreSource& source, const Dataset& ds, const SplitResult& split,
                      const EvalPlan& plan, EvalTarget target, const EvalOptions& options,
                      const MetricRegister& reg) {
  if (options.metrics.empty() || options.ks.empty()) {
    throw ConfigError("evaluation needs at least one metric and one K");
  }
  for (const auto& name : options.metrics) reg.get(name);
  const auto max_k = *std::max_element(options.ks.begin(), options.ks.end());
  if (*std::min_element(options.ks.begin(), options.ks.end()) == 0) {
    throw ConfigError("K must be positive");
  }
  const auto n_items = static_cast<std::size_t>(ds.n_items());
  if (max_k > n_items) {
    throw ConfigError("K=" + std::to_string(max_k) + " exceeds the item count");
  }

  const auto candidates = build_candidates(ds, split, target, plan.uni_negatives, plan.seed);
  const bool full = candidates.full;
  const bool mask = full && options.mask_history;

  std::vector<std::vector<Id>> history;
  if (mask) {
    history = items_by_user(ds, split.train);
    if (target == EvalTarget::test) {
      const auto valid = items_by_user(ds, split.valid);
      for (std::size_t u = 0; u < history.size(); ++u) history[u] = merged(history[u], valid[u]);
    }
  }

  const auto n_users = candidates.users.size();
  const auto batch_size = std::max<std::size_t>(1, options.batch_size);
  const auto n_batches = (n_users + batch_size - 1) / batch_size;

  const auto run_batch = [&](std::size_t b) {
    const auto begin = b * batch_size;
    const auto end = std::min(n_users, begin + batch_size);
    std::vector<Id> users;
    std::vector<std::vector<Id>> positives;
    for (auto i = begin; i < end; ++i) {
      users.push_back(candidates.users[i].user);
      positives.push_back(candidates.users[i].positives);
    }

    ScoreMatrix scores;
    if (full) {
      scores = reshape_full(source.full(users), users.size(), n_items);
      for (std::size_t r = 0; r < scores.rows; ++r) scores.row(r)[kPaddingId] = kMaskedScore;
      if (mask) {
        std::vector<std::vector<Id>> masked;
        masked.reserve(users.size());
        for (std::size_t r = 0; r < users.size(); ++r) {
          masked.push_back(minus(history[static_cast<std::size_t>(users[r])], positives[r]));
        }
        mask_training_items(scores, masked);
      }
    } else {
      std::vector<std::vector<Id>> rows;
      std::vector<Id> pair_users;
      std::vector<Id> pair_items;
      for (auto i = begin; i < end; ++i) {
        const auto& entry = candidates.users[i];
        rows.push_back(entry.candidates);
        pair_users.insert(pair_users.end(), entry.candidates.size(), entry.user);
        pair_items.insert(pair_items.end(), entry.candidates.begin(), entry.candidates.end());
      }
      scores = reshape_sampled(source.pairs(pair_users, pair_items), rows, n_items);
    }
    const auto top = topk_find(scores, max_k);
    return index_hits(top, relevance_matrix(positives, n_items));
  };

  std::vector<HitMatrix> blocks(n_batches);
  const auto workers = std::min(std::max<std::size_t>(1, options.threads), n_batches);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) blocks[b] = run_batch(b);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (auto b = w; b < n_batches; b += workers) blocks[b] = run_batch(b);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  Collector collector;
  for (const auto& block : blocks) collector.add(block);
  if (collector.users() == 0) {
    HitMatrix empty;
    empty.k = max_k;
    collector.add(empty);
  }

  auto report = summarize(collector.hits(), options.metrics, options.ks, reg);
  report.setting = plan.setting();
  report.target = target == EvalTarget::test ? "test" : "valid";
  report.masked = mask;
  return report;
}

}  // namespace recbench
