#pragma once

#include <stdexcept>
#include <string>

namespace ssq {

// Raised when an iterative routine produces a non-finite update. The message
// names the offending quantity (and coordinate index where applicable).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssq
