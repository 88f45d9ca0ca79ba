#pragma once

// Atomic files: suffix-identified delimited text files carrying all task
// input. Line 1 is a header of `name:type` tokens, the remaining lines are
// data rows. Empty cells are missing values. Sequence cells separate their
// elements with a single space. Cells may not contain the separator.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace recbench {

enum class FieldType { token, token_seq, float_, float_seq };

std::string_view to_string(FieldType type);
// Throws ParseError for any tag other than token/token_seq/float/float_seq.
FieldType parse_field_type(std::string_view tag);

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::token;

  bool operator==(const FieldSpec&) const = default;
};

enum class AtomicFileKind { inter, user, item, kg, link, net };

std::string_view suffix(AtomicFileKind kind);
AtomicFileKind parse_file_kind(std::string_view suffix);

using TokenColumn = std::vector<std::optional<std::string>>;
using TokenSeqColumn = std::vector<std::optional<std::vector<std::string>>>;
using FloatColumn = std::vector<std::optional<double>>;
using FloatSeqColumn = std::vector<std::optional<std::vector<double>>>;

// One typed column. The alternative always agrees with the FieldSpec type.
using Column = std::variant<TokenColumn, TokenSeqColumn, FloatColumn, FloatSeqColumn>;

Column make_column(FieldType type);
std::size_t column_size(const Column& column);

class DataTable {
 public:
  DataTable() = default;
  DataTable(AtomicFileKind kind, std::vector<FieldSpec> schema, std::vector<Column> columns);

  AtomicFileKind kind() const { return kind_; }
  const std::vector<FieldSpec>& schema() const { return schema_; }
  const std::vector<Column>& columns() const { return columns_; }
  std::size_t row_count() const { return rows_; }
  std::size_t field_count() const { return schema_.size(); }

  bool has_field(std::string_view name) const;
  // Index of `name` in the schema; throws SchemaError when absent.
  std::size_t field_index(std::string_view name) const;
  const Column& column(std::string_view name) const;

  bool operator==(const DataTable&) const = default;

 private:
  AtomicFileKind kind_ = AtomicFileKind::inter;
  std::vector<FieldSpec> schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

// Field names the kind-specific checks look for.
struct AtomicFieldNames {
  std::string user_id = "user_id";
  std::string item_id = "item_id";
};

struct ParseOptions {
  char separator = ',';
  AtomicFieldNames fields;
};

// Splits a sequence cell on single spaces. Empty text yields an empty list.
std::vector<std::string> split_sequence(std::string_view cell);

DataTable parse_atomic_text(std::string_view text, AtomicFileKind kind,
                            const ParseOptions& options = {});
DataTable parse_atomic_file(const std::filesystem::path& path, AtomicFileKind kind,
                            const ParseOptions& options = {});

// Floats are written with the shortest representation that reads back to
// the same double. Missing values and empty sequences become empty cells.
std::string format_atomic_text(const DataTable& table, char separator = ',');
void write_atomic_file(const DataTable& table, const std::filesystem::path& path,
                       char separator = ',');

// Maps one source column onto an atomic field.
struct ColumnMapping {
  std::string source;
  FieldSpec target;
};

// Parses `userId=user_id:token,movieId=item_id:token`.
std::vector<ColumnMapping> parse_column_mapping(std::string_view text);

// Reads headered delimited text and produces an atomic table holding only the
// mapped columns, in mapping order.
DataTable convert_csv_text(std::string_view text, const std::vector<ColumnMapping>& mapping,
                           AtomicFileKind kind, char source_separator = ',');
DataTable convert_csv(const std::filesystem::path& path,
                      const std::vector<ColumnMapping>& mapping, AtomicFileKind kind,
                      char source_separator = ',');

// Checks the per-kind structural rules (.inter has user and item ids, .kg is
// a token triplet, ...). Throws SchemaError.
void validate_kind(const std::vector<FieldSpec>& schema, AtomicFileKind kind,
                   const AtomicFieldNames& names = {});

}  // namespace recbench
