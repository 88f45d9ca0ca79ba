#include "recbench/atomic_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "recbench/error.hpp"

namespace recbench {
namespace {

std::vector<std::string_view> split_view(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// Splits into lines on '\n'. A terminating newline does not open a new row.
std::vector<std::string_view> split_lines(std::string_view text) {
  auto lines = split_view(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  return lines;
}

std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

void append_double(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

std::string describe_cell(std::string_view field, std::size_t line) {
  return "field '" + std::string(field) + "' on line " + std::to_string(line);
}

// Appends one cell to `column`, converting per the column's type.
void push_cell(Column& column, std::string_view cell, std::string_view field, std::size_t line) {
  std::visit(
      [&](auto& values) {
        using T = std::decay_t<decltype(values)>;
        if (cell.empty()) {
          values.emplace_back(std::nullopt);
          return;
        }
        if constexpr (std::is_same_v<T, TokenColumn>) {
          values.emplace_back(std::string(cell));
        } else if constexpr (std::is_same_v<T, TokenSeqColumn>) {
          values.emplace_back(split_sequence(cell));
        } else if constexpr (std::is_same_v<T, FloatColumn>) {
          const auto value = parse_double(cell);
          if (!value) {
            throw ParseError("non-numeric value '" + std::string(cell) + "' in float " +
                                 describe_cell(field, line),
                             line);
          }
          values.emplace_back(*value);
        } else {
          std::vector<double> seq;
          for (const auto& part : split_sequence(cell)) {
            const auto value = parse_double(part);
            if (!value) {
              throw ParseError("non-numeric element '" + part + "' in float_seq " +
                                   describe_cell(field, line),
                               line);
            }
            seq.push_back(*value);
          }
          values.emplace_back(std::move(seq));
        }
      },
      column);
}

void append_token(std::string& out, const std::string& token, char separator, bool in_seq) {
  if (token.find(separator) != std::string::npos || token.find('\n') != std::string::npos ||
      (in_seq && token.find(' ') != std::string::npos)) {
    throw SchemaError("token '" + token + "' contains a reserved delimiter");
  }
  out += token;
}

void append_cell(std::string& out, const Column& column, std::size_t row, char separator) {
  std::visit(
      [&](const auto& values) {
        using T = std::decay_t<decltype(values)>;
        const auto& cell = values[row];
        if (!cell) return;
        if constexpr (std::is_same_v<T, TokenColumn>) {
          append_token(out, *cell, separator, false);
        } else if constexpr (std::is_same_v<T, TokenSeqColumn>) {
          for (std::size_t i = 0; i < cell->size(); ++i) {
            if (i > 0) out += ' ';
            append_token(out, (*cell)[i], separator, true);
          }
        } else if constexpr (std::is_same_v<T, FloatColumn>) {
          append_double(out, *cell);
        } else {
          for (std::size_t i = 0; i < cell->size(); ++i) {
            if (i > 0) out += ' ';
            append_double(out, (*cell)[i]);
          }
        }
      },
      column);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

FieldSpec parse_header_token(std::string_view token) {
  const auto colon = token.rfind(':');
  if (colon == std::string_view::npos) {
    throw ParseError("malformed header token '" + std::string(token) + "', expected name:type",
                     1);
  }
  FieldSpec spec;
  spec.name = std::string(token.substr(0, colon));
  if (spec.name.empty()) throw ParseError("empty field name in header", 1);
  try {
    spec.type = parse_field_type(token.substr(colon + 1));
  } catch (const ParseError& e) {
    throw ParseError(e.what(), 1);
  }
  return spec;
}

bool is_token(FieldType type) { return type == FieldType::token; }

}  // namespace

std::string_view to_string(FieldType type) {
  switch (type) {
    case FieldType::token:
      return "token";
    case FieldType::token_seq:
      return "token_seq";
    case FieldType::float_:
      return "float";
    case FieldType::float_seq:
      return "float_seq";
  }
  return "token";
}

FieldType parse_field_type(std::string_view tag) {
  if (tag == "token") return FieldType::token;
  if (tag == "token_seq") return FieldType::token_seq;
  if (tag == "float") return FieldType::float_;
  if (tag == "float_seq") return FieldType::float_seq;
  throw ParseError("unknown field type '" + std::string(tag) + "'");
}

std::string_view suffix(AtomicFileKind kind) {
  switch (kind) {
    case AtomicFileKind::inter:
      return "inter";
    case AtomicFileKind::user:
      return "user";
    case AtomicFileKind::item:
      return "item";
    case AtomicFileKind::kg:
      return "kg";
    case AtomicFileKind::link:
      return "link";
    case AtomicFileKind::net:
      return "net";
  }
  return "inter";
}

AtomicFileKind parse_file_kind(std::string_view text) {
  if (!text.empty() && text.front() == '.') text.remove_prefix(1);
  for (auto kind : {AtomicFileKind::inter, AtomicFileKind::user, AtomicFileKind::item,
                    AtomicFileKind::kg, AtomicFileKind::link, AtomicFileKind::net}) {
    if (suffix(kind) == text) return kind;
  }
  throw ParseError("unknown atomic file kind '" + std::string(text) + "'");
}

Column make_column(FieldType type) {
  switch (type) {
    case FieldType::token:
      return TokenColumn{};
    case FieldType::token_seq:
      return TokenSeqColumn{};
    case FieldType::float_:
      return FloatColumn{};
    case FieldType::float_seq:
      return FloatSeqColumn{};
  }
  return TokenColumn{};
}

std::size_t column_size(const Column& column) {
  return std::visit([](const auto& values) { return values.size(); }, column);
}

DataTable::DataTable(AtomicFileKind kind, std::vector<FieldSpec> schema,
                     std::vector<Column> columns)
    : kind_(kind), schema_(std::move(schema)), columns_(std::move(columns)) {
  if (schema_.size() != columns_.size()) {
    throw SchemaError("schema has " + std::to_string(schema_.size()) + " fields but " +
                      std::to_string(columns_.size()) + " columns were given");
  }
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name.empty()) throw SchemaError("empty field name");
    if (!seen.insert(schema_[i].name).second) {
      throw SchemaError("duplicate field '" + schema_[i].name + "'");
    }
    if (columns_[i].index() != static_cast<std::size_t>(schema_[i].type)) {
      throw SchemaError("column type does not match field '" + schema_[i].name + "'");
    }
  }
  rows_ = columns_.empty() ? 0 : column_size(columns_.front());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (column_size(columns_[i]) != rows_) {
      throw SchemaError("column '" + schema_[i].name + "' has " +
                        std::to_string(column_size(columns_[i])) + " rows, expected " +
                        std::to_string(rows_));
    }
  }
}

bool DataTable::has_field(std::string_view name) const {
  for (const auto& spec : schema_) {
    if (spec.name == name) return true;
  }
  return false;
}

std::size_t DataTable::field_index(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return i;
  }
  throw SchemaError("unknown field '" + std::string(name) + "' in ." +
                    std::string(suffix(kind_)) + " table");
}

const Column& DataTable::column(std::string_view name) const {
  return columns_[field_index(name)];
}

std::vector<std::string> split_sequence(std::string_view cell) {
  std::vector<std::string> out;
  if (cell.empty()) return out;
  for (const auto part : split_view(cell, ' ')) out.emplace_back(part);
  return out;
}

void validate_kind(const std::vector<FieldSpec>& schema, AtomicFileKind kind,
                   const AtomicFieldNames& names) {
  const auto find = [&](std::string_view name) -> const FieldSpec* {
    for (const auto& spec : schema) {
      if (spec.name == name) return &spec;
    }
    return nullptr;
  };
  const auto require_token_id = [&](std::string_view name) {
    const auto* spec = find(name);
    if (spec == nullptr) {
      throw SchemaError("." + std::string(suffix(kind)) + " file requires field '" +
                        std::string(name) + "'");
    }
    if (!is_token(spec->type)) {
      throw SchemaError("field '" + std::string(name) + "' must be of type token");
    }
  };
  const auto require_leading_tokens = [&](std::size_t count) {
    if (schema.size() < count) {
      throw SchemaError("." + std::string(suffix(kind)) + " file requires at least " +
                        std::to_string(count) + " fields");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!is_token(schema[i].type)) {
        throw SchemaError("field '" + schema[i].name + "' of ." + std::string(suffix(kind)) +
                          " file must be of type token");
      }
    }
  };

  switch (kind) {
    case AtomicFileKind::inter:
      require_token_id(names.user_id);
      require_token_id(names.item_id);
      break;
    case AtomicFileKind::user:
      require_token_id(names.user_id);
      break;
    case AtomicFileKind::item:
      require_token_id(names.item_id);
      break;
    case AtomicFileKind::kg:
      require_leading_tokens(3);
      if (schema.size() != 3) throw SchemaError(".kg rows are head/tail/relation triplets");
      break;
    case AtomicFileKind::link:
      require_leading_tokens(2);
      if (schema.size() != 2) throw SchemaError(".link rows are (item, entity) pairs");
      break;
    case AtomicFileKind::net:
      require_leading_tokens(2);
      if (schema.size() > 3 || (schema.size() == 3 && schema[2].type != FieldType::float_)) {
        throw SchemaError(".net rows are (source, target, optional float weight)");
      }
      break;
  }
}

DataTable parse_atomic_text(std::string_view text, AtomicFileKind kind,
                            const ParseOptions& options) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) throw ParseError("missing header", 1);

  std::vector<FieldSpec> schema;
  for (const auto token : split_view(lines.front(), options.separator)) {
    schema.push_back(parse_header_token(token));
  }
  std::set<std::string_view> seen;
  for (const auto& spec : schema) {
    if (!seen.insert(spec.name).second) {
      throw ParseError("duplicate field '" + spec.name + "' in header", 1);
    }
  }
  validate_kind(schema, kind, options.fields);

  std::vector<Column> columns;
  columns.reserve(schema.size());
  for (const auto& spec : schema) columns.push_back(make_column(spec.type));

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto cells = split_view(lines[i], options.separator);
    if (cells.size() != schema.size()) {
      throw ParseError("expected " + std::to_string(schema.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t f = 0; f < cells.size(); ++f) {
      push_cell(columns[f], cells[f], schema[f].name, line_no);
    }
  }
  return DataTable(kind, std::move(schema), std::move(columns));
}

DataTable parse_atomic_file(const std::filesystem::path& path, AtomicFileKind kind,
                            const ParseOptions& options) {
  const auto text = read_file(path);
  try {
    return parse_atomic_text(text, kind, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_atomic_text(const DataTable& table, char separator) {
  std::string out;
  const auto& schema = table.schema();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (f > 0) out += separator;
    append_token(out, schema[f].name, separator, false);
    out += ':';
    out += to_string(schema[f].type);
  }
  out += '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (f > 0) out += separator;
      append_cell(out, table.columns()[f], r, separator);
    }
    out += '\n';
  }
  return out;
}

void write_atomic_file(const DataTable& table, const std::filesystem::path& path,
                       char separator) {
  const auto text = format_atomic_text(table, separator);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<ColumnMapping> parse_column_mapping(std::string_view text) {
  std::vector<ColumnMapping> mapping;
  for (const auto entry : split_view(text, ',')) {
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError("malformed mapping entry '" + std::string(entry) +
                       "', expected source=name:type");
    }
    ColumnMapping m;
    m.source = std::string(entry.substr(0, eq));
    m.target = parse_header_token(entry.substr(eq + 1));
    mapping.push_back(std::move(m));
  }
  return mapping;
}

DataTable convert_csv_text(std::string_view text, const std::vector<ColumnMapping>& mapping,
                           AtomicFileKind kind, char source_separator) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("missing header", 1);
  const auto header = split_view(lines.front(), source_separator);

  std::vector<std::size_t> source_index;
  std::vector<FieldSpec> schema;
  for (const auto& m : mapping) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == m.source) {
        found = i;
        break;
      }
    }
    if (found == header.size()) {
      throw SchemaError("mapping references absent source column '" + m.source + "'");
    }
    source_index.push_back(found);
    schema.push_back(m.target);
  }
  validate_kind(schema, kind);

  std::vector<Column> columns;
  for (const auto& spec : schema) columns.push_back(make_column(spec.type));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto cells = split_view(lines[i], source_separator);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t f = 0; f < schema.size(); ++f) {
      push_cell(columns[f], cells[source_index[f]], mapping[f].source, line_no);
    }
  }
  return DataTable(kind, std::move(schema), std::move(columns));
}

DataTable convert_csv(const std::filesystem::path& path,
                      const std::vector<ColumnMapping>& mapping, AtomicFileKind kind,
                      char source_separator) {
  return convert_csv_text(read_file(path), mapping, kind, source_separator);
}

}  // namespace recbench
