#pragma once

// Matrix-form top-K evaluation. Scores for a block of users are laid out as
// an n x m matrix (reshaping), excluded entries are set to -inf (filling),
// the K best columns per row are selected (topk-finding), and those column
// indices are looked up in a binary relevance matrix to give the n x K hit
// matrix (indexing) from which every ranking metric is computed.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "recbench/dataset.hpp"

namespace recbench {

inline constexpr float kMaskedScore = -std::numeric_limits<float>::infinity();

enum class ScoreProvenance { full, sampled };

struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
  ScoreProvenance provenance = ScoreProvenance::full;

  std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

// Row-major n x K column indices, best first. Ties go to the lower index.
struct TopKIndexMatrix {
  std::size_t rows = 0;
  std::size_t k = 0;
  std::vector<std::int32_t> indices;

  std::span<const std::int32_t> row(std::size_t r) const { return {indices.data() + r * k, k}; }
};

struct RelevanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> values;

  std::span<const std::uint8_t> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct HitMatrix {
  std::size_t rows = 0;
  std::size_t k = 0;
  std::vector<std::uint8_t> hits;
  std::vector<std::int64_t> pos_counts;

  std::span<const std::uint8_t> row(std::size_t r) const { return {hits.data() + r * k, k}; }
  // Appends the rows of `block`, which must have the same width.
  void append(const HitMatrix& block);
};

// Full mode: `scores` is the row-major n x m model output.
ScoreMatrix reshape_full(std::span<const double> scores, std::size_t rows, std::size_t n_items);

// Sampled mode: row r holds `candidates[r].size()` scores, concatenated over
// rows in `scores`. Every other entry is -inf. Throws DataError on a
// candidate index >= n_items or a length mismatch.
ScoreMatrix reshape_sampled(std::span<const double> scores,
                            std::span<const std::vector<Id>> candidates, std::size_t n_items);

// Sets D[r][i] = -inf for every i in items[r]. Throws DataError on an index
// out of range.
void mask_training_items(ScoreMatrix& scores, std::span<const std::vector<Id>> items);

// Per row, the K highest scores in descending order. Single pass with a
// bounded heap; a full sort is never performed. Throws DataError if K > m.
TopKIndexMatrix topk_find(const ScoreMatrix& scores, std::size_t k);

// B[r][i] = 1 iff i is in positives[r].
RelevanceMatrix relevance_matrix(std::span<const std::vector<Id>> positives, std::size_t n_items);

// C[r][j] = B[r][A[r][j]]; pos_counts are the row sums of B.
HitMatrix index_hits(const TopKIndexMatrix& top, const RelevanceMatrix& relevance);

// Per-user values plus their mean. Users without positives get NaN and are
// left out of the mean.
struct MetricValues {
  std::vector<double> per_user;
  double mean = 0.0;
  std::size_t counted = 0;
};

// K must not exceed the hit matrix width; DataError otherwise.
MetricValues recall_at_k(const HitMatrix& hits, std::size_t k);
MetricValues precision_at_k(const HitMatrix& hits, std::size_t k);
// Binary-relevance NDCG with the ideal DCG truncated at min(K, positives).
MetricValues ndcg_at_k(const HitMatrix& hits, std::size_t k);
MetricValues mrr_at_k(const HitMatrix& hits, std::size_t k);

struct ValueMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

ValueMetrics value_metrics(std::span<const double> predictions, std::span<const double> truths);

}  // namespace recbench
