#include "recbench/batch.hpp"

#include <algorithm>
#include <limits>

#include "recbench/error.hpp"

namespace recbench {
namespace {

// Builds a column whose row r is source row index[r].
BatchColumn gather(const BatchColumn& column, const std::vector<std::size_t>& index) {
  return std::visit(
      [&](const auto& values) -> BatchColumn {
        using T = std::decay_t<decltype(values)>;
        if constexpr (std::is_same_v<T, IdSeqBatch>) {
          IdSeqBatch out;
          out.rows = index.size();
          out.pad_length = values.pad_length;
          out.values.reserve(out.rows * out.pad_length);
          for (auto r : index) {
            const auto row = values.row(r);
            out.values.insert(out.values.end(), row.begin(), row.end());
          }
          return out;
        } else {
          T out;
          out.reserve(index.size());
          for (auto r : index) out.push_back(values[r]);
          return out;
        }
      },
      column);
}

}  // namespace

std::size_t batch_column_size(const BatchColumn& column) {
  return std::visit(
      [](const auto& values) -> std::size_t {
        using T = std::decay_t<decltype(values)>;
        if constexpr (std::is_same_v<T, IdSeqBatch>) {
          return values.rows;
        } else {
          return values.size();
        }
      },
      column);
}

Batch& Batch::set(std::string name, BatchColumn column) {
  const auto length = batch_column_size(column);
  const bool replaces_only = columns_.size() == 1 && columns_.count(name) == 1;
  if (!columns_.empty() && !replaces_only && length != size_) {
    throw DataError("column '" + name + "' has length " + std::to_string(length) +
                    ", batch length is " + std::to_string(size_));
  }
  if (auto* seq = std::get_if<IdSeqBatch>(&column)) {
    if (seq->values.size() != seq->rows * seq->pad_length) {
      throw DataError("sequence column '" + name + "' has an inconsistent shape");
    }
  }
  size_ = length;
  columns_.insert_or_assign(std::move(name), std::move(column));
  return *this;
}

bool Batch::has(std::string_view name) const { return columns_.find(name) != columns_.end(); }

const BatchColumn& Batch::column(std::string_view name) const {
  const auto it = columns_.find(name);
  if (it == columns_.end()) throw DataError("batch has no column '" + std::string(name) + "'");
  return it->second;
}

const std::vector<Id>& Batch::ids(std::string_view name) const {
  const auto* values = std::get_if<std::vector<Id>>(&column(name));
  if (values == nullptr) throw DataError("batch column '" + std::string(name) + "' is not an ID column");
  return *values;
}

const std::vector<double>& Batch::floats(std::string_view name) const {
  const auto* values = std::get_if<std::vector<double>>(&column(name));
  if (values == nullptr) throw DataError("batch column '" + std::string(name) + "' is not a float column");
  return *values;
}

const IdSeqBatch& Batch::sequences(std::string_view name) const {
  const auto* values = std::get_if<IdSeqBatch>(&column(name));
  if (values == nullptr) throw DataError("batch column '" + std::string(name) + "' is not a sequence column");
  return *values;
}

std::vector<std::string> Batch::names() const {
  std::vector<std::string> out;
  for (const auto& [name, column] : columns_) out.push_back(name);
  return out;
}

Batch batch_repeat(const Batch& batch, std::size_t times) {
  if (times == 0) throw DataError("repeat count must be positive");
  std::vector<std::size_t> index;
  index.reserve(batch.size() * times);
  for (std::size_t t = 0; t < times; ++t) {
    for (std::size_t r = 0; r < batch.size(); ++r) index.push_back(r);
  }
  Batch out;
  for (const auto& [name, column] : batch.columns()) out.set(name, gather(column, index));
  return out;
}

Batch batch_repeat_interleave(const Batch& batch, std::size_t times) {
  if (times == 0) throw DataError("repeat count must be positive");
  std::vector<std::size_t> index;
  index.reserve(batch.size() * times);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (std::size_t t = 0; t < times; ++t) index.push_back(r);
  }
  Batch out;
  for (const auto& [name, column] : batch.columns()) out.set(name, gather(column, index));
  return out;
}

Batch batch_update(const Batch& batch, const Batch& other) {
  if (batch.empty()) return other;
  Batch out = batch;
  const std::vector<std::size_t> broadcast(batch.size(), 0);
  for (const auto& [name, column] : other.columns()) {
    const auto length = batch_column_size(column);
    if (length == batch.size()) {
      out.set(name, column);
    } else if (length == 1) {
      out.set(name, gather(column, broadcast));
    } else {
      throw DataError("cannot update a batch of length " + std::to_string(batch.size()) +
                      " with column '" + name + "' of length " + std::to_string(length));
    }
  }
  return out;
}

Batch interaction_batch(const Dataset& ds, std::span<const std::size_t> rows) {
  const auto& inter = ds.inter();
  Batch batch;
  for (std::size_t f = 0; f < inter.schema.size(); ++f) {
    const auto& name = inter.schema[f].name;
    const auto& column = inter.columns[f];
    if (const auto* ids = std::get_if<IdColumn>(&column)) {
      std::vector<Id> out;
      out.reserve(rows.size());
      for (auto r : rows) out.push_back((*ids)[r]);
      batch.set(name, std::move(out));
    } else if (const auto* seqs = std::get_if<IdSeqColumn>(&column)) {
      IdSeqBatch out;
      out.rows = rows.size();
      for (auto r : rows) out.pad_length = std::max(out.pad_length, (*seqs)[r].size());
      out.values.assign(out.rows * out.pad_length, kPaddingId);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& seq = (*seqs)[rows[i]];
        std::copy(seq.begin(), seq.end(), out.values.begin() + i * out.pad_length);
      }
      batch.set(name, std::move(out));
    } else if (const auto* floats = std::get_if<FloatColumn>(&column)) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (auto r : rows) {
        out.push_back((*floats)[r].value_or(std::numeric_limits<double>::quiet_NaN()));
      }
      batch.set(name, std::move(out));
    }
  }
  return batch;
}

}  // namespace recbench
