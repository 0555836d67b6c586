#pragma once

#include <stdexcept>
#include <string>

namespace wastedata {

// Bad input or a violated precondition: rules, traces, configs, plan entries.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public DomainError {
 public:
  using DomainError::DomainError;
};

class CorruptionError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace wastedata
