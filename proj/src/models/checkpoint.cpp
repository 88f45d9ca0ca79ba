#include "recbench/models/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "recbench/error.hpp"
#include "recbench/hash.hpp"

namespace recbench {
namespace {

constexpr char kMagic[8] = {'R', 'B', 'C', 'K', 'P', 'T', '\0', '\0'};

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw CheckpointError("checkpoint is truncated");
  }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(const char* data, std::size_t n) {
  Fnv1a h;
  h.update(data, n);
  return h.digest();
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["kind"] = ckpt.state.kind;
  manifest["config_hash"] = ckpt.config_hash;
  manifest["epoch"] = ckpt.state.epoch;
  if (ckpt.best_valid && std::isfinite(*ckpt.best_valid)) {
    manifest["best_valid"] = *ckpt.best_valid;
  } else {
    manifest["best_valid"] = nullptr;
  }
  manifest["rng_state"] = ckpt.state.rng_state;
  // Scalars travel as bit patterns so they survive any JSON number handling.
  nlohmann::ordered_json hyper = nlohmann::ordered_json::object();
  for (const auto& [name, value] : ckpt.state.hyperparameters) {
    hyper[name] = std::bit_cast<std::uint64_t>(value);
  }
  manifest["hyperparameters"] = hyper;
  manifest["meta"] = ckpt.meta;
  const std::string text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.state.arrays.size()));
  for (const auto& [name, values] : ckpt.state.arrays) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint64_t>(out, values.size());
    for (double v : values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  put<std::uint64_t>(out, checksum(out.data(), out.size()));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file");
  }
  const std::size_t body = bytes.size() - 8;
  {
    Reader tail(bytes, bytes.size());
    tail.text(body);
    if (tail.get<std::uint64_t>() != checksum(bytes.data(), body)) {
      throw CheckpointError("checkpoint checksum mismatch (file corrupted)");
    }
  }
  Reader in(bytes, body);
  in.text(sizeof(kMagic));
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto manifest_size = in.get<std::uint64_t>();
  if (manifest_size > in.remaining()) throw CheckpointError("checkpoint is truncated");
  Checkpoint ckpt;
  try {
    const auto manifest = nlohmann::json::parse(in.text(manifest_size));
    ckpt.state.kind = manifest.at("kind").get<std::string>();
    ckpt.config_hash = manifest.at("config_hash").get<std::string>();
    ckpt.state.epoch = manifest.at("epoch").get<std::size_t>();
    if (!manifest.at("best_valid").is_null()) ckpt.best_valid = manifest.at("best_valid").get<double>();
    ckpt.state.rng_state = manifest.at("rng_state").get<std::string>();
    for (const auto& [name, bits] : manifest.at("hyperparameters").items()) {
      ckpt.state.hyperparameters[name] = std::bit_cast<double>(bits.get<std::uint64_t>());
    }
    ckpt.meta = manifest.at("meta").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }
  const auto n_arrays = in.get<std::uint32_t>();
  for (std::uint32_t a = 0; a < n_arrays; ++a) {
    const auto name = in.text(in.get<std::uint32_t>());
    const auto count = in.get<std::uint64_t>();
    if (count > in.remaining() / 8) throw CheckpointError("checkpoint is truncated");
    std::vector<double> values(count);
    for (auto& v : values) v = std::bit_cast<double>(in.get<std::uint64_t>());
    if (!ckpt.state.arrays.emplace(name, std::move(values)).second) {
      throw CheckpointError("duplicate array '" + name + "' in checkpoint");
    }
  }
  if (in.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void save_state(const ModelState& state, const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.state = state;
  save_checkpoint(ckpt, path);
}

ModelState load_state(const std::filesystem::path& path) { return load_checkpoint(path).state; }

}  // namespace recbench
