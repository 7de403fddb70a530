#ifndef PARAGRAM_ERROR_HPP_
#define PARAGRAM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace paragram {

// Malformed input files, inconsistent shapes, degenerate statistics.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command lines and configuration: unknown keys, type mismatches,
// missing required options.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace paragram

#endif  // PARAGRAM_ERROR_HPP_
