#pragma once

#include <stdexcept>
#include <string>

namespace parcelsense {

/// Bad or inconsistent input data: malformed files, dimension mismatches,
/// labels outside the closed set. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside its documented range (invalid configuration).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The external labeler broke the wire protocol, timed out, or exited.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace parcelsense
