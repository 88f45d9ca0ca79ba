#include "recbench/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "recbench/error.hpp"
#include "recbench/hash.hpp"

namespace recbench {
namespace {

bool is_token_type(FieldType type) {
  return type == FieldType::token || type == FieldType::token_seq;
}

std::string vocab_name(AtomicFileKind kind, std::size_t index, const std::string& field,
                       const DatasetFields& fields) {
  switch (kind) {
    case AtomicFileKind::inter:
    case AtomicFileKind::user:
    case AtomicFileKind::item:
      return field;
    case AtomicFileKind::kg:
      return index < 2 ? kEntityVocab : kRelationVocab;
    case AtomicFileKind::link:
      return index == 0 ? fields.item_id : kEntityVocab;
    case AtomicFileKind::net:
      return fields.user_id;
  }
  return field;
}

// Tables in the order that defines first occurrence.
template <typename Parts, typename F>
void for_each_table(Parts& parts, F&& f) {
  f(parts.inter);
  if (parts.user) f(*parts.user);
  if (parts.item) f(*parts.item);
  if (parts.net) f(*parts.net);
  if (parts.link) f(*parts.link);
  if (parts.kg) f(*parts.kg);
}

FeatureTable encode_table(const DataTable& raw, const DatasetFields& fields,
                          std::map<std::string, Vocabulary>& vocabs) {
  FeatureTable table;
  table.kind = raw.kind();
  table.schema = raw.schema();
  table.rows = raw.row_count();
  const auto n_fields = raw.field_count();
  table.columns.resize(n_fields);
  table.vocab.resize(n_fields);

  for (std::size_t f = 0; f < n_fields; ++f) {
    const auto& spec = raw.schema()[f];
    if (is_token_type(spec.type)) {
      table.vocab[f] = vocab_name(raw.kind(), f, spec.name, fields);
      vocabs.try_emplace(table.vocab[f]);
      if (spec.type == FieldType::token) {
        table.columns[f] = IdColumn(table.rows, kPaddingId);
      } else {
        table.columns[f] = IdSeqColumn(table.rows);
      }
    } else {
      table.columns[f] = std::visit(
          [](const auto& values) -> FeatureColumn {
            using T = std::decay_t<decltype(values)>;
            if constexpr (std::is_same_v<T, FloatColumn> || std::is_same_v<T, FloatSeqColumn>) {
              return values;
            } else {
              return FloatColumn{};
            }
          },
          raw.columns()[f]);
    }
  }

  // Row-major so that columns sharing a vocabulary interleave correctly.
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t f = 0; f < n_fields; ++f) {
      if (table.vocab[f].empty()) continue;
      auto& vocab = vocabs.at(table.vocab[f]);
      if (const auto* tokens = std::get_if<TokenColumn>(&raw.columns()[f])) {
        if ((*tokens)[r]) std::get<IdColumn>(table.columns[f])[r] = vocab.add(*(*tokens)[r]);
      } else {
        const auto& cell = std::get<TokenSeqColumn>(raw.columns()[f])[r];
        if (cell) {
          auto& out = std::get<IdSeqColumn>(table.columns[f])[r];
          for (const auto& token : *cell) out.push_back(vocab.add(token));
        }
      }
    }
  }
  return table;
}

void hash_table(Fnv1a& h, const FeatureTable& table) {
  h.update_value(static_cast<int>(table.kind));
  h.update_value(table.rows);
  for (std::size_t f = 0; f < table.schema.size(); ++f) {
    h.update(table.schema[f].name);
    h.update_value(static_cast<int>(table.schema[f].type));
    h.update(table.vocab[f]);
    std::visit(
        [&](const auto& values) {
          using T = std::decay_t<decltype(values)>;
          for (const auto& cell : values) {
            if constexpr (std::is_same_v<T, IdColumn>) {
              h.update_value(cell);
            } else if constexpr (std::is_same_v<T, IdSeqColumn>) {
              h.update_value(cell.size());
              for (auto id : cell) h.update_value(id);
            } else if constexpr (std::is_same_v<T, FloatColumn>) {
              h.update_value(static_cast<bool>(cell));
              if (cell) h.update_value(*cell);
            } else {
              h.update_value(static_cast<bool>(cell));
              if (cell) {
                h.update_value(cell->size());
                for (double v : *cell) h.update_value(v);
              }
            }
          }
        },
        table.columns[f]);
  }
}

DatasetParts copy_parts(const Dataset& ds) { return ds.parts(); }

[[noreturn]] void throw_emptied() { throw DataError("dataset emptied by filtering"); }

Dataset with_inter_rows(const Dataset& ds, const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw_emptied();
  auto parts = copy_parts(ds);
  parts.inter = ds.inter().select_rows(keep);
  return Dataset(std::move(parts));
}

FloatColumn& float_column_for_update(FeatureTable& table, std::size_t index) {
  auto* values = std::get_if<FloatColumn>(&table.columns[index]);
  if (values == nullptr) {
    throw SchemaError("field '" + table.schema[index].name + "' is not a float field");
  }
  return *values;
}

double parse_number(std::string_view text) {
  const auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("expected a number, found '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Id Vocabulary::add(const std::string& token) {
  const auto [it, inserted] = ids_.try_emplace(token, static_cast<Id>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<Id> Vocabulary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Id Vocabulary::id(std::string_view token) const {
  const auto found = find(token);
  if (!found) throw DataError("unknown token '" + std::string(token) + "'");
  return *found;
}

const std::string& Vocabulary::token(Id id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("ID " + std::to_string(id) + " out of vocabulary range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool FeatureTable::has_field(std::string_view name) const {
  return std::any_of(schema.begin(), schema.end(),
                     [&](const FieldSpec& spec) { return spec.name == name; });
}

std::size_t FeatureTable::field_index(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  throw SchemaError("unknown field '" + std::string(name) + "' in ." +
                    std::string(suffix(kind)) + " table");
}

const FieldSpec& FeatureTable::field(std::string_view name) const {
  return schema[field_index(name)];
}

const FeatureColumn& FeatureTable::column(std::string_view name) const {
  return columns[field_index(name)];
}

const IdColumn& FeatureTable::ids(std::string_view name) const {
  const auto* values = std::get_if<IdColumn>(&column(name));
  if (values == nullptr) throw SchemaError("field '" + std::string(name) + "' is not a token field");
  return *values;
}

const FloatColumn& FeatureTable::floats(std::string_view name) const {
  const auto* values = std::get_if<FloatColumn>(&column(name));
  if (values == nullptr) throw SchemaError("field '" + std::string(name) + "' is not a float field");
  return *values;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> keep) const {
  FeatureTable out;
  out.kind = kind;
  out.schema = schema;
  out.vocab = vocab;
  out.rows = keep.size();
  out.columns.reserve(columns.size());
  for (const auto& column : columns) {
    out.columns.push_back(std::visit(
        [&](const auto& values) -> FeatureColumn {
          std::decay_t<decltype(values)> picked;
          picked.reserve(keep.size());
          for (auto r : keep) picked.push_back(values[r]);
          return picked;
        },
        column));
  }
  return out;
}

Dataset::Dataset(DatasetParts parts) {
  for_each_table(parts, [&](const FeatureTable& table) {
    if (table.columns.size() != table.schema.size() || table.vocab.size() != table.schema.size()) {
      throw SchemaError("malformed ." + std::string(suffix(table.kind)) + " table");
    }
    for (std::size_t f = 0; f < table.schema.size(); ++f) {
      const auto& column = table.columns[f];
      const auto size = std::visit([](const auto& v) { return v.size(); }, column);
      if (size != table.rows) {
        throw SchemaError("column '" + table.schema[f].name + "' has the wrong length");
      }
      if (table.vocab[f].empty()) continue;
      const auto vocab_it = parts.vocabularies.find(table.vocab[f]);
      if (vocab_it == parts.vocabularies.end()) {
        throw SchemaError("missing vocabulary '" + table.vocab[f] + "'");
      }
      const auto limit = static_cast<Id>(vocab_it->second.size());
      const auto check = [&](Id id) {
        if (id < 0 || id >= limit) {
          throw DataError("ID " + std::to_string(id) + " of field '" + table.schema[f].name +
                          "' exceeds its vocabulary");
        }
      };
      if (const auto* ids = std::get_if<IdColumn>(&column)) {
        for (auto id : *ids) check(id);
      } else if (const auto* seqs = std::get_if<IdSeqColumn>(&column)) {
        for (const auto& seq : *seqs) {
          for (auto id : seq) check(id);
        }
      }
    }
  });
  const auto& inter = parts.inter;
  if (inter.kind != AtomicFileKind::inter) throw SchemaError("interaction table has the wrong kind");
  for (const auto* name : {&parts.fields.user_id, &parts.fields.item_id}) {
    const auto& spec = inter.field(*name);
    if (spec.type != FieldType::token) {
      throw SchemaError("field '" + *name + "' must be a token field");
    }
    const auto& ids = inter.ids(*name);
    const auto missing = std::find(ids.begin(), ids.end(), kPaddingId);
    if (missing != ids.end()) {
      throw DataError("interaction row " + std::to_string(missing - ids.begin()) +
                      " has no '" + *name + "'");
    }
  }
  parts_ = std::make_shared<const DatasetParts>(std::move(parts));
}

Dataset Dataset::build(const DatasetSources& sources, const DatasetFields& fields) {
  AtomicFieldNames names{fields.user_id, fields.item_id};
  validate_kind(sources.inter.schema(), AtomicFileKind::inter, names);
  DatasetParts parts;
  parts.fields = fields;
  parts.vocabularies.try_emplace(fields.user_id);
  parts.vocabularies.try_emplace(fields.item_id);

  const auto encode = [&](const std::optional<DataTable>& raw, AtomicFileKind expected,
                          std::optional<FeatureTable>& out) {
    if (!raw) return;
    if (raw->kind() != expected) {
      throw SchemaError("expected a ." + std::string(suffix(expected)) + " table");
    }
    validate_kind(raw->schema(), expected, names);
    out = encode_table(*raw, fields, parts.vocabularies);
  };
  parts.inter = encode_table(sources.inter, fields, parts.vocabularies);
  encode(sources.user, AtomicFileKind::user, parts.user);
  encode(sources.item, AtomicFileKind::item, parts.item);
  encode(sources.net, AtomicFileKind::net, parts.net);
  encode(sources.link, AtomicFileKind::link, parts.link);
  encode(sources.kg, AtomicFileKind::kg, parts.kg);
  return Dataset(std::move(parts));
}

const Vocabulary& Dataset::vocabulary(std::string_view name) const {
  const auto it = parts_->vocabularies.find(std::string(name));
  if (it == parts_->vocabularies.end()) {
    throw SchemaError("no vocabulary named '" + std::string(name) + "'");
  }
  return it->second;
}

Id Dataset::n_users() const { return static_cast<Id>(vocabulary(fields().user_id).size()); }
Id Dataset::n_items() const { return static_cast<Id>(vocabulary(fields().item_id).size()); }
const IdColumn& Dataset::user_ids() const { return inter().ids(fields().user_id); }
const IdColumn& Dataset::item_ids() const { return inter().ids(fields().item_id); }

bool Dataset::has_timestamp() const {
  return inter().has_field(fields().timestamp) &&
         inter().field(fields().timestamp).type == FieldType::float_;
}

std::vector<double> Dataset::timestamps() const {
  if (!has_timestamp()) {
    throw SchemaError("interactions have no float field '" + fields().timestamp + "'");
  }
  const auto& column = inter().floats(fields().timestamp);
  std::vector<double> out;
  out.reserve(column.size());
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column[r]) {
      throw DataError("missing timestamp on interaction row " + std::to_string(r));
    }
    out.push_back(*column[r]);
  }
  return out;
}

DataTable Dataset::decode(const FeatureTable& table) const {
  std::vector<Column> columns;
  for (std::size_t f = 0; f < table.schema.size(); ++f) {
    const auto& column = table.columns[f];
    if (const auto* ids = std::get_if<IdColumn>(&column)) {
      const auto& vocab = vocabulary(table.vocab[f]);
      TokenColumn out;
      for (auto id : *ids) {
        if (id == kPaddingId) {
          out.emplace_back(std::nullopt);
        } else {
          out.emplace_back(vocab.token(id));
        }
      }
      columns.emplace_back(std::move(out));
    } else if (const auto* seqs = std::get_if<IdSeqColumn>(&column)) {
      const auto& vocab = vocabulary(table.vocab[f]);
      TokenSeqColumn out;
      for (const auto& seq : *seqs) {
        if (seq.empty()) {
          out.emplace_back(std::nullopt);
          continue;
        }
        std::vector<std::string> tokens;
        for (auto id : seq) tokens.push_back(vocab.token(id));
        out.emplace_back(std::move(tokens));
      }
      columns.emplace_back(std::move(out));
    } else if (const auto* floats = std::get_if<FloatColumn>(&column)) {
      columns.emplace_back(*floats);
    } else {
      columns.emplace_back(std::get<FloatSeqColumn>(column));
    }
  }
  return DataTable(table.kind, table.schema, std::move(columns));
}

std::uint64_t Dataset::fingerprint() const {
  Fnv1a h;
  h.update(fields().user_id);
  h.update(fields().item_id);
  h.update(fields().timestamp);
  h.update(fields().label);
  for_each_table(*parts_, [&](const FeatureTable& table) { hash_table(h, table); });
  for (const auto& [name, vocab] : vocabularies()) {
    h.update(name);
    for (const auto& token : vocab.tokens()) h.update(token);
  }
  return h.digest();
}

Dataset load_dataset(const std::filesystem::path& prefix, const ParseOptions& options,
                     const DatasetFields& fields) {
  ParseOptions opts = options;
  opts.fields = AtomicFieldNames{fields.user_id, fields.item_id};
  const auto path_for = [&](AtomicFileKind kind) {
    auto p = prefix;
    p += "." + std::string(suffix(kind));
    return p;
  };
  DatasetSources sources;
  sources.inter = parse_atomic_file(path_for(AtomicFileKind::inter), AtomicFileKind::inter, opts);
  const auto optional_table = [&](AtomicFileKind kind, std::optional<DataTable>& out) {
    const auto p = path_for(kind);
    if (std::filesystem::exists(p)) out = parse_atomic_file(p, kind, opts);
  };
  optional_table(AtomicFileKind::user, sources.user);
  optional_table(AtomicFileKind::item, sources.item);
  optional_table(AtomicFileKind::kg, sources.kg);
  optional_table(AtomicFileKind::link, sources.link);
  optional_table(AtomicFileKind::net, sources.net);
  return Dataset::build(sources, fields);
}

Dataset filter_by_inter_num(const Dataset& ds, std::size_t min_user, std::size_t min_item) {
  const auto& users = ds.user_ids();
  const auto& items = ds.item_ids();
  const auto rows = users.size();
  std::vector<std::size_t> user_count(static_cast<std::size_t>(ds.n_users()), 0);
  std::vector<std::size_t> item_count(static_cast<std::size_t>(ds.n_items()), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    ++user_count[static_cast<std::size_t>(users[r])];
    ++item_count[static_cast<std::size_t>(items[r])];
  }
  // Counts only shrink, so a row that violates a threshold keeps violating
  // it; sweeping until nothing changes reaches the unique k-core.
  std::vector<bool> alive(rows, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!alive[r]) continue;
      const auto u = static_cast<std::size_t>(users[r]);
      const auto i = static_cast<std::size_t>(items[r]);
      if (user_count[u] < min_user || item_count[i] < min_item) {
        alive[r] = false;
        --user_count[u];
        --item_count[i];
        changed = true;
      }
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < rows; ++r) {
    if (alive[r]) keep.push_back(r);
  }
  return with_inter_rows(ds, keep);
}

bool ValueInterval::contains(double value) const {
  const bool above = low_closed ? value >= low : value > low;
  const bool below = high_closed ? value <= high : value < high;
  return above && below;
}

std::pair<std::string, FieldPredicate> parse_field_predicate(std::string_view text) {
  const auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  const auto in_pos = text.find(" in ");
  if (in_pos != std::string_view::npos) {
    const auto field = std::string(trim(text.substr(0, in_pos)));
    const auto body = trim(text.substr(in_pos + 4));
    if (field.empty() || body.size() < 2) {
      throw ParseError("malformed predicate '" + std::string(text) + "'");
    }
    const auto inner = body.substr(1, body.size() - 2);
    if (body.front() == '{' && body.back() == '}') {
      ValueSet set;
      std::size_t start = 0;
      while (start <= inner.size()) {
        const auto comma = inner.find(',', start);
        const auto part =
            trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start));
        if (!part.empty()) set.values.emplace_back(part);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return {field, set};
    }
    if ((body.front() == '[' || body.front() == '(') && (body.back() == ']' || body.back() == ')')) {
      const auto comma = inner.find(',');
      if (comma == std::string_view::npos) {
        throw ParseError("interval needs two bounds in '" + std::string(text) + "'");
      }
      ValueInterval interval;
      interval.low = parse_number(inner.substr(0, comma));
      interval.high = parse_number(inner.substr(comma + 1));
      interval.low_closed = body.front() == '[';
      interval.high_closed = body.back() == ']';
      return {field, interval};
    }
    throw ParseError("malformed predicate '" + std::string(text) + "'");
  }

  for (const std::string_view op : {">=", "<=", "==", ">", "<"}) {
    const auto pos = text.find(op);
    if (pos == std::string_view::npos) continue;
    const auto field = std::string(trim(text.substr(0, pos)));
    const auto rhs = trim(text.substr(pos + op.size()));
    if (field.empty() || rhs.empty()) break;
    if (op == "==") return {field, ValueSet{{std::string(rhs)}}};
    ValueInterval interval;
    const double value = parse_number(rhs);
    if (op == ">=") {
      interval.low = value;
    } else if (op == ">") {
      interval.low = value;
      interval.low_closed = false;
    } else if (op == "<=") {
      interval.high = value;
      interval.high_closed = true;
    } else {
      interval.high = value;
    }
    return {field, interval};
  }
  throw ParseError("malformed predicate '" + std::string(text) + "'");
}

Dataset filter_by_field_value(const Dataset& ds, std::string_view field,
                              const FieldPredicate& predicate) {
  const auto& inter = ds.inter();
  const auto index = inter.field_index(field);
  const auto& column = inter.columns[index];
  std::vector<std::size_t> keep;

  if (const auto* floats = std::get_if<FloatColumn>(&column)) {
    std::vector<double> set_values;
    if (const auto* set = std::get_if<ValueSet>(&predicate)) {
      for (const auto& v : set->values) set_values.push_back(parse_number(v));
    }
    for (std::size_t r = 0; r < inter.rows; ++r) {
      const auto& cell = (*floats)[r];
      if (!cell) continue;
      bool pass = false;
      if (const auto* interval = std::get_if<ValueInterval>(&predicate)) {
        pass = interval->contains(*cell);
      } else {
        pass = std::find(set_values.begin(), set_values.end(), *cell) != set_values.end();
      }
      if (pass) keep.push_back(r);
    }
  } else if (const auto* ids = std::get_if<IdColumn>(&column)) {
    const auto* set = std::get_if<ValueSet>(&predicate);
    if (set == nullptr) {
      throw SchemaError("token field '" + std::string(field) + "' only supports value sets");
    }
    const auto& vocab = ds.vocabulary(inter.vocab[index]);
    std::set<Id> allowed;
    for (const auto& token : set->values) {
      if (const auto id = vocab.find(token)) allowed.insert(*id);
    }
    for (std::size_t r = 0; r < inter.rows; ++r) {
      if ((*ids)[r] != kPaddingId && allowed.count((*ids)[r]) > 0) keep.push_back(r);
    }
  } else {
    throw SchemaError("field '" + std::string(field) + "' is a sequence field");
  }
  return with_inter_rows(ds, keep);
}

Dataset remap_ids(const Dataset& ds) {
  auto parts = copy_parts(ds);
  std::map<std::string, std::vector<Id>> old_to_new;
  std::map<std::string, Vocabulary> fresh;
  for (const auto& [name, vocab] : parts.vocabularies) {
    std::vector<Id> mapping(vocab.size(), -1);
    mapping[kPaddingId] = kPaddingId;
    old_to_new.emplace(name, std::move(mapping));
    fresh.try_emplace(name);
  }

  for_each_table(parts, [&](FeatureTable& table) {
    for (std::size_t r = 0; r < table.rows; ++r) {
      for (std::size_t f = 0; f < table.schema.size(); ++f) {
        if (table.vocab[f].empty()) continue;
        auto& mapping = old_to_new.at(table.vocab[f]);
        const auto& old_vocab = parts.vocabularies.at(table.vocab[f]);
        auto& new_vocab = fresh.at(table.vocab[f]);
        const auto remap = [&](Id& id) {
          auto& slot = mapping[static_cast<std::size_t>(id)];
          if (slot < 0) slot = new_vocab.add(old_vocab.token(id));
          id = slot;
        };
        if (auto* ids = std::get_if<IdColumn>(&table.columns[f])) {
          remap((*ids)[r]);
        } else {
          for (auto& id : std::get<IdSeqColumn>(table.columns[f])[r]) remap(id);
        }
      }
    }
  });
  parts.vocabularies = std::move(fresh);
  return Dataset(std::move(parts));
}

Dataset fill_nan(const Dataset& ds) {
  auto parts = copy_parts(ds);
  for_each_table(parts, [&](FeatureTable& table) {
    for (std::size_t f = 0; f < table.schema.size(); ++f) {
      if (auto* floats = std::get_if<FloatColumn>(&table.columns[f])) {
        double sum = 0.0;
        std::size_t observed = 0;
        for (const auto& cell : *floats) {
          if (cell) {
            sum += *cell;
            ++observed;
          }
        }
        if (observed == floats->size()) continue;
        if (observed == 0) {
          throw DataError("float column '" + table.schema[f].name + "' of ." +
                          std::string(suffix(table.kind)) + " table is entirely missing");
        }
        const double mean = sum / static_cast<double>(observed);
        for (auto& cell : *floats) {
          if (!cell) cell = mean;
        }
      } else if (auto* seqs = std::get_if<FloatSeqColumn>(&table.columns[f])) {
        for (auto& cell : *seqs) {
          if (!cell) cell.emplace();
        }
      }
    }
  });
  return Dataset(std::move(parts));
}

Dataset set_label_by_threshold(const Dataset& ds, std::string_view field, double threshold) {
  auto parts = copy_parts(ds);
  auto& inter = parts.inter;
  const auto& source = float_column_for_update(inter, inter.field_index(field));
  FloatColumn labels;
  labels.reserve(source.size());
  for (const auto& cell : source) labels.emplace_back(cell && *cell >= threshold ? 1.0 : 0.0);

  const auto& label_name = parts.fields.label;
  if (inter.has_field(label_name)) {
    const auto index = inter.field_index(label_name);
    inter.schema[index].type = FieldType::float_;
    inter.vocab[index].clear();
    inter.columns[index] = std::move(labels);
  } else {
    inter.schema.push_back(FieldSpec{label_name, FieldType::float_});
    inter.vocab.emplace_back();
    inter.columns.emplace_back(std::move(labels));
  }
  return Dataset(std::move(parts));
}

Dataset normalize(const Dataset& ds, const std::vector<std::string>& fields) {
  auto parts = copy_parts(ds);
  for (const auto& name : fields) {
    bool found = false;
    for_each_table(parts, [&](FeatureTable& table) {
      if (!table.has_field(name)) return;
      found = true;
      auto& values = float_column_for_update(table, table.field_index(name));
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& cell : values) {
        if (!cell) continue;
        lo = std::min(lo, *cell);
        hi = std::max(hi, *cell);
      }
      const double span = hi - lo;
      for (auto& cell : values) {
        if (!cell) continue;
        cell = span > 0.0 ? (*cell - lo) / span : 0.0;
      }
    });
    if (!found) throw SchemaError("unknown field '" + name + "'");
  }
  return Dataset(std::move(parts));
}

}  // namespace recbench
