#pragma once

// Binary checkpoint container:
//   "RBCKPT\0\0"  u32 format version  u64 manifest length  manifest JSON
//   u32 array count, then per array: u32 name length, name, u64 count,
//   count little-endian IEEE-754 doubles
//   u64 FNV-1a of every preceding byte
// Loading validates the whole file before returning anything.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "recbench/models/recommender.hpp"

namespace recbench {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelState state;
  std::string config_hash;
  std::optional<double> best_valid;
  // Free-form runner bookkeeping (stall count, config text, ...).
  std::map<std::string, std::string> meta;

  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
// Throws CheckpointError on any malformed, truncated or corrupted input.
Checkpoint decode_checkpoint(const std::string& bytes);

// Written to a sibling temporary file and renamed into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save_state(const ModelState& state, const std::filesystem::path& path);
ModelState load_state(const std::filesystem::path& path);

}  // namespace recbench
