#include "recbench/runner/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "recbench/error.hpp"
#include "recbench/evaluator.hpp"
#include "recbench/random.hpp"
#include "recbench/ranking.hpp"

namespace recbench {
namespace {

struct Instance {
  std::size_t users = 0;
  std::size_t items = 0;
  std::vector<float> scores;
  std::vector<std::vector<Id>> seen;
  std::vector<std::vector<Id>> positives;
};

Instance make_instance(const BenchOptions& o) {
  Instance inst;
  inst.users = o.users;
  inst.items = o.items;
  inst.scores.resize(o.users * o.items);
  Rng rng(derive_seed(o.seed, 0));
  for (auto& s : inst.scores) s = static_cast<float>(uniform_unit(rng));
  const auto per_user = std::min(o.items, o.history + o.positives);
  for (std::size_t u = 0; u < o.users; ++u) {
    auto picks = sample_without_replacement(o.items, per_user, derive_seed(o.seed, u + 1));
    Rng order(derive_seed(o.seed, o.users + u + 1));
    shuffle_in_place(std::span<std::uint64_t>(picks), order);
    const auto n_pos = std::min(o.positives, picks.size());
    std::vector<Id> pos(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(n_pos));
    std::vector<Id> seen(picks.begin() + static_cast<std::ptrdiff_t>(n_pos), picks.end());
    std::sort(pos.begin(), pos.end());
    std::sort(seen.begin(), seen.end());
    inst.positives.push_back(std::move(pos));
    inst.seen.push_back(std::move(seen));
  }
  return inst;
}

const std::vector<std::string> kMetrics{"recall", "precision", "ndcg", "mrr"};

std::string accelerated(const Instance& inst, const BenchOptions& o, const MetricRegister& reg) {
  Collector collector;
  for (std::size_t begin = 0; begin < inst.users; begin += o.batch_size) {
    const auto end = std::min(inst.users, begin + o.batch_size);
    const auto rows = end - begin;
    ScoreMatrix scores;
    scores.rows = rows;
    scores.cols = inst.items;
    scores.values.assign(inst.scores.begin() + static_cast<std::ptrdiff_t>(begin * inst.items),
                         inst.scores.begin() + static_cast<std::ptrdiff_t>(end * inst.items));
    const std::span<const std::vector<Id>> seen(inst.seen.data() + begin, rows);
    const std::span<const std::vector<Id>> pos(inst.positives.data() + begin, rows);
    mask_training_items(scores, seen);
    collector.add(index_hits(topk_find(scores, o.k), relevance_matrix(pos, inst.items)));
  }
  return summarize(collector.hits(), kMetrics, {o.k}, reg).to_json();
}

std::string naive(const Instance& inst, const BenchOptions& o, const MetricRegister& reg) {
  HitMatrix hits;
  hits.k = o.k;
  std::vector<std::pair<float, std::int32_t>> row(inst.items);
  for (std::size_t u = 0; u < inst.users; ++u) {
    const float* src = inst.scores.data() + u * inst.items;
    for (std::size_t i = 0; i < inst.items; ++i) row[i] = {src[i], static_cast<std::int32_t>(i)};
    for (auto i : inst.seen[u]) row[static_cast<std::size_t>(i)].first = kMaskedScore;
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    const auto& pos = inst.positives[u];
    for (std::size_t j = 0; j < o.k; ++j) {
      hits.hits.push_back(std::binary_search(pos.begin(), pos.end(), row[j].second) ? 1 : 0);
    }
    hits.pos_counts.push_back(static_cast<std::int64_t>(pos.size()));
    ++hits.rows;
  }
  return summarize(hits, kMetrics, {o.k}, reg).to_json();
}

template <typename F>
double mean_seconds(std::size_t repeats, std::string& out, F&& fn) {
  double total = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    auto report = fn();
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r == 0) {
      out = std::move(report);
    } else if (report != out) {
      throw DataError("benchmark path is not deterministic across repeats");
    }
  }
  return total / static_cast<double>(repeats);
}

}  // namespace

BenchResult bench_eval(const BenchOptions& o) {
  if (o.users == 0 || o.items == 0 || o.k == 0 || o.repeats == 0 || o.batch_size == 0) {
    throw ConfigError("bench sizes must all be >= 1");
  }
  if (o.k > o.items) throw ConfigError("bench K exceeds the item count");
  const auto inst = make_instance(o);
  const auto reg = MetricRegister::with_defaults();
  BenchResult r;
  r.accelerated_seconds =
      mean_seconds(o.repeats, r.accelerated_report, [&] { return accelerated(inst, o, reg); });
  r.naive_seconds = mean_seconds(o.repeats, r.naive_report, [&] { return naive(inst, o, reg); });
  r.speedup = r.accelerated_seconds > 0.0 ? r.naive_seconds / r.accelerated_seconds : 0.0;
  r.identical = r.accelerated_report == r.naive_report;
  return r;
}

std::string format_bench(const BenchOptions& o, const BenchResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "users %zu  items %zu  K %zu  repeats %zu\n"
                "accelerated  %.4f s\n"
                "naive        %.4f s\n"
                "speedup      %.2fx\n"
                "reports      %s\n",
                o.users, o.items, o.k, o.repeats, r.accelerated_seconds, r.naive_seconds,
                r.speedup, r.identical ? "identical" : "DIFFER");
  return std::string(buf) + r.accelerated_report;
}

}  // namespace recbench
