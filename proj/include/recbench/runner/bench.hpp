#pragma once

#include <cstdint>
#include <string>

namespace recbench {

struct BenchOptions {
  std::size_t users = 5000;
  std::size_t items = 10000;
  std::size_t k = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 2020;
  // Per user: seen items that get masked, and held-out positives.
  std::size_t history = 20;
  std::size_t positives = 5;
  std::size_t batch_size = 256;
};

struct BenchResult {
  double accelerated_seconds = 0.0;  // mean over repeats
  double naive_seconds = 0.0;
  double speedup = 0.0;
  bool identical = false;
  std::string accelerated_report;
  std::string naive_report;
};

// Times full-ranking evaluation of one seeded random score matrix two ways:
// the batched reshape/mask/topk/index pipeline, and a per-user full sort.
// Both feed the same metric summary, so their reports must match byte for
// byte.
BenchResult bench_eval(const BenchOptions& options);

std::string format_bench(const BenchOptions& options, const BenchResult& result);

}  // namespace recbench
