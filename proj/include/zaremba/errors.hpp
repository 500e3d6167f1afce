#pragma once

#include <stdexcept>
#include <string>

namespace zaremba {

// Error categories. The CLI maps each onto a distinct exit code.

// Violated precondition or malformed input (exit 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Integer result does not fit the checked width.
class OverflowError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Request exceeds memory or materialization limits (exit 2).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computed result failed a self-check (exit 3).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Census file errors.
class CensusFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CensusFormatError : public CensusFileError {
 public:
  using CensusFileError::CensusFileError;
};
class CensusVersionError : public CensusFileError {
 public:
  using CensusFileError::CensusFileError;
};
class CensusTruncatedError : public CensusFileError {
 public:
  using CensusFileError::CensusFileError;
};

}  // namespace zaremba
