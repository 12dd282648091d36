#ifndef ERGO_ERRORS_HPP
#define ERGO_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad value / precondition violation (dimension mismatch, out-of-range parameter, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file or string.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A computation would exceed the configured state cap.  `required` carries the
// resource estimate (number of weights / states) for the error message.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::size_t required, std::size_t cap)
      : Error(what + " (required " + std::to_string(required) + " > cap " +
              std::to_string(cap) + ")"),
        required(required),
        cap(cap) {}
  std::size_t required;
  std::size_t cap;
};

// Set operation restricted to axis-aligned boxes.
class UnsupportedShape : public Error {
 public:
  using Error::Error;
};

}  // namespace ergo

#endif
