#pragma once

#include <stdexcept>
#include <string>

namespace alteraser {

/// Bad input data: unreadable files, malformed lines, shape mismatches.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Optimization failure: divergence, factorization breakdown.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A Gram cache was consulted after the parameters it summarizes changed.
class StaleCacheError : public std::logic_error {
 public:
  explicit StaleCacheError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace alteraser
