#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace recbench {

// 64-bit FNV-1a, used for content fingerprints and config hashes.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view text) {
    update(text.data(), text.size());
    const char terminator = '\0';
    update(&terminator, 1);
  }
  template <typename T>
  void update_value(const T& value) {
    update(&value, sizeof(T));
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace recbench
