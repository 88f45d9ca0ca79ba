#pragma once

// The per-step data unit handed to models: named, equal-length columns.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recbench/dataset.hpp"

namespace recbench {

// Row-major rows x pad_length ID matrix, right-padded with kPaddingId.
struct IdSeqBatch {
  std::vector<Id> values;
  std::size_t rows = 0;
  std::size_t pad_length = 0;

  std::span<const Id> row(std::size_t r) const {
    return {values.data() + r * pad_length, pad_length};
  }
  bool operator==(const IdSeqBatch&) const = default;
};

using BatchColumn = std::variant<std::vector<Id>, IdSeqBatch, std::vector<double>>;

std::size_t batch_column_size(const BatchColumn& column);

class Batch {
 public:
  Batch() = default;

  // Adds or replaces a column. Throws DataError if its length differs from
  // the batch length (the first column defines the length).
  Batch& set(std::string name, BatchColumn column);

  std::size_t size() const { return size_; }
  bool empty() const { return columns_.empty(); }
  bool has(std::string_view name) const;
  const BatchColumn& column(std::string_view name) const;
  const std::vector<Id>& ids(std::string_view name) const;
  const std::vector<double>& floats(std::string_view name) const;
  const IdSeqBatch& sequences(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::map<std::string, BatchColumn, std::less<>>& columns() const { return columns_; }

  // Device transfer has nothing to do on a host-only engine; these return an
  // identical copy so calling code reads the same as on an accelerator.
  Batch to(std::string_view /*device*/) const { return *this; }
  Batch cpu() const { return *this; }

  bool operator==(const Batch&) const = default;

 private:
  std::map<std::string, BatchColumn, std::less<>> columns_;
  std::size_t size_ = 0;
};

// Tiles the whole batch: [a, b] x2 -> [a, b, a, b].
Batch batch_repeat(const Batch& batch, std::size_t times);
// Repeats each row in place: [a, b] x2 -> [a, a, b, b].
Batch batch_repeat_interleave(const Batch& batch, std::size_t times);
// Columns of `other` overwrite or extend `batch`. Length-1 columns of `other`
// broadcast to the batch length; any other mismatch throws DataError.
Batch batch_update(const Batch& batch, const Batch& other);

// Interaction rows as a batch. Token sequences are padded to the longest row;
// missing floats become NaN; float sequences are not carried.
Batch interaction_batch(const Dataset& ds, std::span<const std::size_t> rows);

}  // namespace recbench
