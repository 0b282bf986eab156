#pragma once

#include <stdexcept>
#include <string>

namespace qreduce {

/// A value lies outside the domain of an operation (zero vector, zero
/// projective point, coordinate outside a chart).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input fails a structural check (non-Hermitian matrix, bad dimension).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ChartDomainError : public DomainError {
 public:
  ChartDomainError(int chart_index, const std::string& what)
      : DomainError(what), chart_index_(chart_index) {}
  int chart_index() const noexcept { return chart_index_; }

 private:
  int chart_index_;
};

/// Invalid configuration value. `key()` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qreduce
