#include "recbench/runner/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "recbench/error.hpp"
#include "recbench/hash.hpp"

namespace recbench {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.emplace_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<std::int64_t> to_integer(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> to_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<bool> to_boolean(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::text: return "text";
    case ValueType::integer: return "integer";
    case ValueType::real: return "number";
    case ValueType::boolean: return "boolean";
    case ValueType::int_list: return "list of integers";
    case ValueType::real_list: return "list of numbers";
    case ValueType::text_list: return "list";
  }
  return "value";
}

bool type_checks(ValueType t, std::string_view v) {
  switch (t) {
    case ValueType::text:
    case ValueType::text_list:
      return true;
    case ValueType::integer: return to_integer(v).has_value();
    case ValueType::real: return to_real(v).has_value();
    case ValueType::boolean: return to_boolean(v).has_value();
    case ValueType::int_list:
      for (const auto& item : split_list(v)) {
        if (!to_integer(item)) return false;
      }
      return true;
    case ValueType::real_list:
      for (const auto& item : split_list(v)) {
        if (!to_real(item)) return false;
      }
      return true;
  }
  return false;
}

// Keys that change where or how far a run goes but not its results.
bool excluded_from_hash(std::string_view key) {
  return key == "output.dir" || key == "train.interrupt_after" || key == "eval.threads";
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"data.path", ValueType::text, "", "dataset prefix; <prefix>.inter must exist"},
      {"data.separator", ValueType::text, ",", "field separator: a character, `tab` or `comma`"},
      {"data.user_field", ValueType::text, "user_id", "user ID field"},
      {"data.item_field", ValueType::text, "item_id", "item ID field"},
      {"data.time_field", ValueType::text, "timestamp", "timestamp field"},
      {"data.label_field", ValueType::text, "label", "label field"},
      {"filter.min_user_inter", ValueType::integer, "0", "k-core threshold for users"},
      {"filter.min_item_inter", ValueType::integer, "0", "k-core threshold for items"},
      {"filter.value", ValueType::text, "", "interaction predicate, e.g. rating>=3"},
      {"filter.order", ValueType::text_list, "value,inter", "order of the two filters"},
      {"fill_nan", ValueType::boolean, "false", "impute missing float values"},
      {"label.field", ValueType::text, "", "field thresholded into the label column"},
      {"label.threshold", ValueType::real, "0", "label = field >= threshold"},
      {"normalize.fields", ValueType::text_list, "", "float fields min-max scaled to [0,1]"},
      {"eval.setting", ValueType::text, "RO_RS,full", "evaluation setting"},
      {"eval.ratios", ValueType::real_list, "0.8,0.1,0.1", "train/valid/test ratios for RS"},
      {"eval.metrics", ValueType::text_list, "recall,ndcg", "ranking metrics"},
      {"eval.topk", ValueType::int_list, "10", "cut-offs"},
      {"eval.valid_metric", ValueType::text, "ndcg@10", "early-stopping metric"},
      {"eval.batch_size", ValueType::integer, "256", "users per evaluation batch"},
      {"eval.mask", ValueType::boolean, "true", "mask seen items in full ranking"},
      {"eval.threads", ValueType::integer, "1", "evaluation worker threads"},
      {"model", ValueType::text, "bpr", "pop, itemknn, ease, bpr or fm"},
      {"model.k", ValueType::integer, "100", "itemknn neighbours"},
      {"model.shrink", ValueType::real, "0", "itemknn shrinkage"},
      {"model.l2", ValueType::real, "500", "ease ridge weight"},
      {"train.lr", ValueType::real, "20", "SGD learning rate on the batch-mean objective"},
      {"train.embedding_dim", ValueType::integer, "32", "embedding dimension"},
      {"train.l2", ValueType::real, "0.0001", "L2 weight"},
      {"train.batch_size", ValueType::integer, "256", "training batch size"},
      {"train.epochs", ValueType::integer, "20", "maximum epochs"},
      {"train.patience", ValueType::integer, "3", "early-stopping patience"},
      {"train.loss", ValueType::text, "bpr", "bpr or margin"},
      {"train.margin", ValueType::real, "1", "hinge margin"},
      {"train.interrupt_after", ValueType::integer, "0", "stop after this epoch (0: never)"},
      {"seed", ValueType::integer, "2020", "seed for splitting, sampling and training"},
      {"output.dir", ValueType::text, "output", "run directory"},
  };
  return keys;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : config_keys()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.key] = k.default_value;
}

void Config::set(std::string_view key, std::string_view value) {
  const auto* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
  const auto v = trim(value);
  if (!type_checks(spec->type, v)) {
    throw ConfigError("config key '" + std::string(key) + "' expects a " + type_name(spec->type) +
                      ", got '" + std::string(v) + "'");
  }
  values_[spec->key] = std::string(v);
}

const std::string& Config::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t Config::integer(std::string_view key) const { return *to_integer(get(key)); }

std::size_t Config::count(std::string_view key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("config key '" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

double Config::real(std::string_view key) const { return *to_real(get(key)); }
bool Config::boolean(std::string_view key) const { return *to_boolean(get(key)); }
std::vector<std::string> Config::text_list(std::string_view key) const {
  return split_list(get(key));
}

std::vector<double> Config::real_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) out.push_back(*to_real(item));
  return out;
}

std::vector<std::size_t> Config::count_list(std::string_view key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(get(key))) {
    const auto v = *to_integer(item);
    if (v < 0) throw ConfigError("config key '" + std::string(key) + "' must be non-negative");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void Config::validate() const {
  if (get("data.path").empty()) throw ConfigError("missing mandatory key 'data.path'");
  parse_options();
  eval_plan().validate();
  const auto options = eval_options();
  if (options.ks.empty()) throw ConfigError("eval.topk must list at least one cut-off");
  for (auto k : options.ks) {
    if (k == 0) throw ConfigError("eval.topk values must be >= 1");
  }
  if (options.batch_size == 0) throw ConfigError("eval.batch_size must be >= 1");
  if (options.threads == 0) throw ConfigError("eval.threads must be >= 1");
  const auto reg = MetricRegister::with_defaults();
  for (const auto& m : options.metrics) reg.get(m);
  const auto& vm = get("eval.valid_metric");
  bool found = false;
  for (const auto& m : options.metrics) {
    for (auto k : options.ks) found = found || vm == m + "@" + std::to_string(k);
  }
  if (!found) {
    throw ConfigError("eval.valid_metric '" + vm + "' is not among the configured metrics and cut-offs");
  }
  if (!is_known_model(get("model"))) {
    throw ConfigError("unknown model '" + get("model") + "', expected pop, itemknn, ease, bpr or fm");
  }
  if (integer("model.k") < 1) throw ConfigError("model.k must be >= 1");
  if (real("model.shrink") < 0.0) throw ConfigError("model.shrink must be non-negative");
  if (!(real("model.l2") > 0.0)) throw ConfigError("model.l2 must be positive");
  count("filter.min_user_inter");
  count("filter.min_item_inter");
  if (!get("filter.value").empty()) parse_field_predicate(get("filter.value"));
  auto order = text_list("filter.order");
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<std::string>{"inter", "value"}) {
    throw ConfigError("filter.order must list `inter` and `value` once each");
  }
  train_config().validate();
  if (integer("train.interrupt_after") < 0) throw ConfigError("train.interrupt_after must be >= 0");
  if (integer("seed") < 0) throw ConfigError("seed must be non-negative");
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + ": " + v + "\n";
  return out;
}

std::string Config::hash() const {
  Fnv1a h;
  for (const auto& [k, v] : values_) {
    if (excluded_from_hash(k)) continue;
    h.update(k);
    h.update(v);
  }
  return to_hex(h.digest());
}

std::filesystem::path Config::data_prefix() const {
  const std::filesystem::path p = get("data.path");
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::filesystem::path Config::output_dir() const {
  return get("output.dir");
}

EvalPlan Config::eval_plan() const {
  auto plan = parse_eval_setting(get("eval.setting"));
  const auto r = real_list("eval.ratios");
  if (r.size() != 3) throw ConfigError("eval.ratios needs three values");
  plan.ratios = {r[0], r[1], r[2]};
  plan.seed = static_cast<std::uint64_t>(integer("seed"));
  return plan;
}

EvalOptions Config::eval_options() const {
  EvalOptions o;
  o.metrics = text_list("eval.metrics");
  o.ks = count_list("eval.topk");
  o.batch_size = count("eval.batch_size");
  o.mask_history = boolean("eval.mask");
  o.threads = count("eval.threads");
  return o;
}

TrainConfig Config::train_config() const {
  TrainConfig t;
  t.learning_rate = real("train.lr");
  t.embedding_dim = count("train.embedding_dim");
  t.l2 = real("train.l2");
  t.batch_size = count("train.batch_size");
  t.epochs = count("train.epochs");
  t.patience = count("train.patience");
  t.seed = static_cast<std::uint64_t>(integer("seed"));
  t.loss = parse_loss_kind(get("train.loss"));
  t.margin = real("train.margin");
  return t;
}

ModelSpec Config::model_spec() const {
  ModelSpec m;
  m.kind = get("model");
  m.knn_k = count("model.k");
  m.knn_shrink = real("model.shrink");
  m.ease_l2 = real("model.l2");
  return m;
}

ParseOptions Config::parse_options() const {
  ParseOptions o;
  const auto& s = get("data.separator");
  if (s == "tab" || s == "\\t") {
    o.separator = '\t';
  } else if (s == "comma") {
    o.separator = ',';
  } else if (s.size() == 1) {
    o.separator = s[0];
  } else {
    throw ConfigError("data.separator must be one character, `tab` or `comma`");
  }
  return o;
}

DatasetFields Config::dataset_fields() const {
  DatasetFields f;
  f.user_id = get("data.user_field");
  f.item_id = get("data.item_field");
  f.timestamp = get("data.time_field");
  f.label = get("data.label_field");
  return f;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("expected `key: value`, got '" + std::string(line) + "'", line_no);
    }
    const auto key = trim(line.substr(0, colon));
    if (key.empty()) throw ParseError("empty key", line_no);
    out.emplace_back(std::string(key), std::string(trim(line.substr(colon + 1))));
  }
  return out;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || trim(text.substr(0, eq)).empty()) {
    throw ConfigError("override must look like key=value, got '" + std::string(text) + "'");
  }
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

Config config_from_text(std::string_view text, const std::vector<std::string>& overrides,
                        std::filesystem::path base_dir) {
  Config cfg;
  cfg.base_dir = std::move(base_dir);
  for (const auto& [k, v] : parse_config_text(text)) cfg.set(k, v);
  for (const auto& o : overrides) {
    const auto [k, v] = parse_override(o);
    cfg.set(k, v);
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::optional<std::filesystem::path>& file,
                   const std::vector<std::string>& overrides) {
  if (!file) return config_from_text("", overrides);
  std::ifstream in(*file);
  if (!in) throw IoError("cannot open config " + file->string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str(), overrides, file->parent_path());
}

}  // namespace recbench
