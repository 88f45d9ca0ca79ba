#pragma once

// Flat `key: value` configuration with dotted keys. Every key has a built-in
// default; a file overrides defaults and `key=value` overrides override the
// file. Values stay as text and are type-checked when the config resolves.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recbench/dataset.hpp"
#include "recbench/evaluator.hpp"
#include "recbench/models/trainer.hpp"

namespace recbench {

enum class ValueType { text, integer, real, boolean, int_list, real_list, text_list };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
};

// Every recognised key, in documentation order.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(std::string_view key);

class Config {
 public:
  // Defaults only; data.path still unset.
  Config();

  // Throws ConfigError naming the key on unknown keys or type mismatches.
  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;

  std::string text(std::string_view key) const { return get(key); }
  std::int64_t integer(std::string_view key) const;
  std::size_t count(std::string_view key) const;
  double real(std::string_view key) const;
  bool boolean(std::string_view key) const;
  std::vector<std::string> text_list(std::string_view key) const;
  std::vector<double> real_list(std::string_view key) const;
  std::vector<std::size_t> count_list(std::string_view key) const;

  // Mandatory keys present and cross-key constraints hold.
  void validate() const;

  // Canonical `key: value` lines, sorted by key.
  std::string serialize() const;
  // FNV-1a over the canonical lines, excluding keys that do not affect
  // results (output directory, simulated interruption).
  std::string hash() const;

  // Directory that a relative data.path resolves against (the config
  // file's directory). output.dir is taken as given.
  std::filesystem::path base_dir;
  std::filesystem::path data_prefix() const;
  std::filesystem::path output_dir() const;

  EvalPlan eval_plan() const;
  EvalOptions eval_options() const;
  TrainConfig train_config() const;
  ModelSpec model_spec() const;
  ParseOptions parse_options() const;
  DatasetFields dataset_fields() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Parses `key: value` lines (# comments, blank lines ignored). Throws
// ParseError with the line number on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

// Splits `key=value`; throws ConfigError.
std::pair<std::string, std::string> parse_override(std::string_view text);

// defaults < file < overrides, validated.
Config load_config(const std::optional<std::filesystem::path>& file,
                   const std::vector<std::string>& overrides);
Config config_from_text(std::string_view text, const std::vector<std::string>& overrides = {},
                        std::filesystem::path base_dir = {});

}  // namespace recbench
