#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

// Argument outside the mathematical domain of an operation (e.g. t > 1).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Invariants that no quantum state can have (det < 1, trace < 2 sqrt(det), ...).
class UnphysicalError : public std::domain_error {
 public:
  explicit UnphysicalError(const std::string& what) : std::domain_error(what) {}
};

// Inference could not proceed: insufficient or degenerate data.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed config or data file.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sqz
