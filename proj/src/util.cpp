#include <cstdio>
#include <sstream>

#include "recbench/error.hpp"
#include "recbench/hash.hpp"
#include "recbench/random.hpp"

namespace recbench {

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng rng_from_state(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  if (in.fail()) throw CheckpointError("malformed RNG state");
  return rng;
}

}  // namespace recbench
