#pragma once

// Encoded, immutable datasets and the preprocessing steps that derive new
// datasets from old ones. Every token field is mapped to contiguous integer
// IDs starting at 1; ID 0 is the padding / unknown token.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "recbench/atomic_io.hpp"

namespace recbench {

using Id = std::int64_t;
inline constexpr Id kPaddingId = 0;

class Vocabulary {
 public:
  Vocabulary() : tokens_{"[PAD]"} {}

  // Returns the ID of `token`, assigning the next free ID on first sight.
  Id add(const std::string& token);
  std::optional<Id> find(std::string_view token) const;
  // Throws DataError for unknown tokens.
  Id id(std::string_view token) const;
  const std::string& token(Id id) const;
  // Number of IDs including the padding ID, so every ID is < size().
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::unordered_map<std::string, Id> ids_;
  std::vector<std::string> tokens_;
};

using IdColumn = std::vector<Id>;
using IdSeqColumn = std::vector<std::vector<Id>>;

// Encoded column. Token fields hold IDs (0 where missing); float fields keep
// explicit missing markers until imputation.
using FeatureColumn = std::variant<IdColumn, IdSeqColumn, FloatColumn, FloatSeqColumn>;

struct FeatureTable {
  AtomicFileKind kind = AtomicFileKind::inter;
  std::vector<FieldSpec> schema;
  std::vector<FeatureColumn> columns;
  // Vocabulary name for each token field; empty for float fields.
  std::vector<std::string> vocab;
  std::size_t rows = 0;

  bool has_field(std::string_view name) const;
  std::size_t field_index(std::string_view name) const;
  const FieldSpec& field(std::string_view name) const;
  const FeatureColumn& column(std::string_view name) const;
  const IdColumn& ids(std::string_view name) const;
  const FloatColumn& floats(std::string_view name) const;

  FeatureTable select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureTable&) const = default;
};

// Names of the fields with special roles.
struct DatasetFields {
  std::string user_id = "user_id";
  std::string item_id = "item_id";
  std::string timestamp = "timestamp";
  std::string label = "label";
};

inline const std::string kEntityVocab = "[entity]";
inline const std::string kRelationVocab = "[relation]";

struct DatasetSources {
  DataTable inter;
  std::optional<DataTable> user;
  std::optional<DataTable> item;
  std::optional<DataTable> kg;
  std::optional<DataTable> link;
  std::optional<DataTable> net;
};

struct DatasetParts {
  DatasetFields fields;
  FeatureTable inter;
  std::optional<FeatureTable> user;
  std::optional<FeatureTable> item;
  std::optional<FeatureTable> kg;
  std::optional<FeatureTable> link;
  std::optional<FeatureTable> net;
  std::map<std::string, Vocabulary> vocabularies;
};

// Shares its contents read-only; copies are cheap and never alias mutable
// state.
class Dataset {
 public:
  // Validates that every ID is within its vocabulary.
  explicit Dataset(DatasetParts parts);

  // Encodes raw tables with first-occurrence IDs.
  static Dataset build(const DatasetSources& sources, const DatasetFields& fields = {});

  const DatasetParts& parts() const { return *parts_; }
  const DatasetFields& fields() const { return parts_->fields; }
  const FeatureTable& inter() const { return parts_->inter; }
  const std::optional<FeatureTable>& user_features() const { return parts_->user; }
  const std::optional<FeatureTable>& item_features() const { return parts_->item; }
  const std::optional<FeatureTable>& kg() const { return parts_->kg; }
  const std::optional<FeatureTable>& link() const { return parts_->link; }
  const std::optional<FeatureTable>& net() const { return parts_->net; }

  const Vocabulary& vocabulary(std::string_view name) const;
  const std::map<std::string, Vocabulary>& vocabularies() const { return parts_->vocabularies; }

  // Sizes including the padding ID.
  Id n_users() const;
  Id n_items() const;
  std::size_t interaction_count() const { return parts_->inter.rows; }
  const IdColumn& user_ids() const;
  const IdColumn& item_ids() const;
  bool has_timestamp() const;
  // Timestamps as doubles; throws DataError on missing values.
  std::vector<double> timestamps() const;

  // Decodes the tokens of a token table back to a raw table.
  DataTable decode(const FeatureTable& table) const;

  // Content hash over every table and vocabulary.
  std::uint64_t fingerprint() const;

 private:
  std::shared_ptr<const DatasetParts> parts_;
};

// Loads `<prefix>.inter` plus whichever of .user/.item/.kg/.link/.net exist.
Dataset load_dataset(const std::filesystem::path& prefix, const ParseOptions& options = {},
                     const DatasetFields& fields = {});

// Keeps the largest sub-table where every user has >= min_user and every
// item >= min_item interactions. Throws DataError when nothing survives.
Dataset filter_by_inter_num(const Dataset& ds, std::size_t min_user, std::size_t min_item);

struct ValueInterval {
  double low = -std::numeric_limits<double>::infinity();
  double high = std::numeric_limits<double>::infinity();
  bool low_closed = true;
  bool high_closed = false;
  bool contains(double value) const;
};

// Values as text, interpreted per the field's type when applied.
struct ValueSet {
  std::vector<std::string> values;
};

using FieldPredicate = std::variant<ValueInterval, ValueSet>;

// Parses `rating>=3`, `timestamp in [0,100)`, `genre in {a,b}`, `rating==5`.
// Returns the field name and predicate.
std::pair<std::string, FieldPredicate> parse_field_predicate(std::string_view text);

// Removes interaction rows whose `field` value violates the predicate; missing
// values always violate it. IDs are not re-compacted.
Dataset filter_by_field_value(const Dataset& ds, std::string_view field,
                              const FieldPredicate& predicate);

// Re-assigns contiguous IDs in first-occurrence order over the current
// tables, dropping tokens that no longer occur anywhere.
Dataset remap_ids(const Dataset& ds);

// Missing floats become the column mean, missing float sequences become
// empty; token fields already encode missing as the padding ID.
Dataset fill_nan(const Dataset& ds);

// Adds (or replaces) a float `label` interaction column: 1 where field >=
// threshold, else 0. Missing values get label 0.
Dataset set_label_by_threshold(const Dataset& ds, std::string_view field, double threshold);

// Min-max rescales each listed float field to [0, 1]; constant columns map to 0.
Dataset normalize(const Dataset& ds, const std::vector<std::string>& fields);

}  // namespace recbench
