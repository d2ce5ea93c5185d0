#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obscura {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data (images, kernels, frame stacks) is malformed or unusable.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Frequency-domain inversion hit (near-)zero transfer values.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Iterative solver objective blew up.
class Diverged : public Error {
 public:
  using Error::Error;
};

/// A file could not be decoded. `offset()` is the byte position where
/// decoding stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& detail, std::size_t offset)
      : Error(detail + " (at byte " + std::to_string(offset) + ")"), detail_(detail), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  /// Message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

}  // namespace obscura
