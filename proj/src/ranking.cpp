#include "recbench/ranking.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/error.hpp"

namespace recbench {
namespace {

struct Entry {
  float score;
  std::int32_t index;
};

// Strict "ranks before" order: higher score first, then lower index.
inline bool ranks_before(const Entry& a, const Entry& b) {
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

void check_k(const HitMatrix& hits, std::size_t k) {
  if (k == 0 || k > hits.k) {
    throw DataError("K=" + std::to_string(k) + " outside hit matrix width " +
                    std::to_string(hits.k));
  }
}

template <typename PerUser>
MetricValues per_user_metric(const HitMatrix& hits, std::size_t k, PerUser&& compute) {
  check_k(hits, k);
  MetricValues out;
  out.per_user.resize(hits.rows);
  double sum = 0.0;
  for (std::size_t r = 0; r < hits.rows; ++r) {
    if (hits.pos_counts[r] <= 0) {
      out.per_user[r] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.per_user[r] = compute(hits.row(r).first(k), hits.pos_counts[r]);
    sum += out.per_user[r];
    ++out.counted;
  }
  out.mean = out.counted > 0 ? sum / static_cast<double>(out.counted) : 0.0;
  return out;
}

std::size_t count_hits(std::span<const std::uint8_t> row) {
  std::size_t n = 0;
  for (auto h : row) n += h;
  return n;
}

}  // namespace

void HitMatrix::append(const HitMatrix& block) {
  if (rows == 0 && hits.empty()) k = block.k;
  if (block.k != k) throw DataError("hit matrix blocks have different widths");
  rows += block.rows;
  hits.insert(hits.end(), block.hits.begin(), block.hits.end());
  pos_counts.insert(pos_counts.end(), block.pos_counts.begin(), block.pos_counts.end());
}

ScoreMatrix reshape_full(std::span<const double> scores, std::size_t rows, std::size_t n_items) {
  if (scores.size() != rows * n_items) {
    throw DataError("score block has " + std::to_string(scores.size()) + " entries, expected " +
                    std::to_string(rows * n_items));
  }
  ScoreMatrix out;
  out.rows = rows;
  out.cols = n_items;
  out.provenance = ScoreProvenance::full;
  out.values.resize(scores.size());
  std::transform(scores.begin(), scores.end(), out.values.begin(),
                 [](double s) { return static_cast<float>(s); });
  return out;
}

ScoreMatrix reshape_sampled(std::span<const double> scores,
                            std::span<const std::vector<Id>> candidates, std::size_t n_items) {
  ScoreMatrix out;
  out.rows = candidates.size();
  out.cols = n_items;
  out.provenance = ScoreProvenance::sampled;
  out.values.assign(out.rows * out.cols, kMaskedScore);
  std::size_t offset = 0;
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    auto row = out.row(r);
    for (auto item : candidates[r]) {
      if (item < 0 || static_cast<std::size_t>(item) >= n_items) {
        throw DataError("candidate index " + std::to_string(item) + " outside [0, " +
                        std::to_string(n_items) + ")");
      }
      if (offset >= scores.size()) throw DataError("fewer scores than candidates");
      row[static_cast<std::size_t>(item)] = static_cast<float>(scores[offset++]);
    }
  }
  if (offset != scores.size()) throw DataError("more scores than candidates");
  return out;
}

void mask_training_items(ScoreMatrix& scores, std::span<const std::vector<Id>> items) {
  if (items.size() != scores.rows) throw DataError("mask lists do not match the score rows");
  for (std::size_t r = 0; r < scores.rows; ++r) {
    auto row = scores.row(r);
    for (auto item : items[r]) {
      if (item < 0 || static_cast<std::size_t>(item) >= scores.cols) {
        throw DataError("masked index " + std::to_string(item) + " out of range");
      }
      row[static_cast<std::size_t>(item)] = kMaskedScore;
    }
  }
}

TopKIndexMatrix topk_find(const ScoreMatrix& scores, std::size_t k) {
  if (k > scores.cols) {
    throw DataError("K=" + std::to_string(k) + " exceeds the " + std::to_string(scores.cols) +
                    " columns");
  }
  TopKIndexMatrix out;
  out.rows = scores.rows;
  out.k = k;
  out.indices.resize(scores.rows * k);
  if (k == 0) return out;

  std::vector<Entry> heap;
  heap.reserve(k);
  for (std::size_t r = 0; r < scores.rows; ++r) {
    const auto row = scores.row(r);
    heap.clear();
    for (std::size_t i = 0; i < k; ++i) {
      heap.push_back({row[i], static_cast<std::int32_t>(i)});
    }
    // The heap front is the entry that ranks last.
    std::make_heap(heap.begin(), heap.end(), ranks_before);
    float threshold = heap.front().score;
    for (std::size_t i = k; i < row.size(); ++i) {
      // Later columns lose ties, so only a strictly larger score enters.
      if (!(row[i] > threshold)) continue;
      std::pop_heap(heap.begin(), heap.end(), ranks_before);
      heap.back() = {row[i], static_cast<std::int32_t>(i)};
      std::push_heap(heap.begin(), heap.end(), ranks_before);
      threshold = heap.front().score;
    }
    std::sort_heap(heap.begin(), heap.end(), ranks_before);
    auto* dst = out.indices.data() + r * k;
    for (std::size_t j = 0; j < k; ++j) dst[j] = heap[j].index;
  }
  return out;
}

RelevanceMatrix relevance_matrix(std::span<const std::vector<Id>> positives, std::size_t n_items) {
  RelevanceMatrix out;
  out.rows = positives.size();
  out.cols = n_items;
  out.values.assign(out.rows * out.cols, 0);
  for (std::size_t r = 0; r < positives.size(); ++r) {
    for (auto item : positives[r]) {
      if (item < 0 || static_cast<std::size_t>(item) >= n_items) {
        throw DataError("positive index " + std::to_string(item) + " out of range");
      }
      out.values[r * n_items + static_cast<std::size_t>(item)] = 1;
    }
  }
  return out;
}

HitMatrix index_hits(const TopKIndexMatrix& top, const RelevanceMatrix& relevance) {
  if (top.rows != relevance.rows) throw DataError("top-K and relevance matrices disagree on rows");
  HitMatrix out;
  out.rows = top.rows;
  out.k = top.k;
  out.hits.resize(top.rows * top.k);
  out.pos_counts.resize(top.rows);
  for (std::size_t r = 0; r < top.rows; ++r) {
    const auto rel = relevance.row(r);
    const auto idx = top.row(r);
    for (std::size_t j = 0; j < top.k; ++j) {
      out.hits[r * top.k + j] = rel[static_cast<std::size_t>(idx[j])];
    }
    out.pos_counts[r] = static_cast<std::int64_t>(count_hits(rel));
  }
  return out;
}

MetricValues recall_at_k(const HitMatrix& hits, std::size_t k) {
  return per_user_metric(hits, k, [](std::span<const std::uint8_t> row, std::int64_t pos) {
    return static_cast<double>(count_hits(row)) / static_cast<double>(pos);
  });
}

MetricValues precision_at_k(const HitMatrix& hits, std::size_t k) {
  return per_user_metric(hits, k, [k](std::span<const std::uint8_t> row, std::int64_t) {
    return static_cast<double>(count_hits(row)) / static_cast<double>(k);
  });
}

MetricValues ndcg_at_k(const HitMatrix& hits, std::size_t k) {
  std::vector<double> discount(k);
  for (std::size_t j = 0; j < k; ++j) discount[j] = 1.0 / std::log2(static_cast<double>(j) + 2.0);
  return per_user_metric(hits, k, [&](std::span<const std::uint8_t> row, std::int64_t pos) {
    double dcg = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j]) dcg += discount[j];
    }
    double idcg = 0.0;
    const auto ideal = std::min<std::size_t>(row.size(), static_cast<std::size_t>(pos));
    for (std::size_t j = 0; j < ideal; ++j) idcg += discount[j];
    return dcg / idcg;
  });
}

MetricValues mrr_at_k(const HitMatrix& hits, std::size_t k) {
  return per_user_metric(hits, k, [](std::span<const std::uint8_t> row, std::int64_t) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j]) return 1.0 / static_cast<double>(j + 1);
    }
    return 0.0;
  });
}

ValueMetrics value_metrics(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || predictions.empty()) {
    throw DataError("value metrics need equal, nonzero lengths");
  }
  double squared = 0.0;
  double absolute = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - truths[i];
    squared += e * e;
    absolute += std::abs(e);
  }
  const auto n = static_cast<double>(predictions.size());
  return {std::sqrt(squared / n), absolute / n};
}

}  // namespace recbench
