#include "ergo/caps.hpp"

#include <cstdlib>
#include <string>

namespace ergo {

namespace {

std::size_t env_cap(std::size_t fallback) {
  const char* v = std::getenv("ERGO_STATE_CAP");
  if (!v || !*v) return fallback;
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (...) {
    return fallback;
  }
}

}  // namespace

std::size_t default_state_cap() { return env_cap(std::size_t{1} << 24); }

std::size_t default_torus_cap() { return env_cap(std::size_t{1} << 20); }

}  // namespace ergo
