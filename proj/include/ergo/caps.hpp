#ifndef ERGO_CAPS_HPP
#define ERGO_CAPS_HPP

#include <cstddef>

namespace ergo {

// Resource caps for exact state-space computation.  ERGO_STATE_CAP in the
// environment overrides both defaults.
std::size_t default_state_cap();  // max weights in a window distribution (2^24)
std::size_t default_torus_cap();  // max states of a torus generator (2^20)

}  // namespace ergo

#endif
