#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snakecpg {

// Bad or inconsistent configuration (unknown key, invariant violated, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state went non-finite during integration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// A closed-form quantity is undefined at the requested point.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Evaluation hit a removable singularity; limit() is the value approached.
class SingularityError : public DomainError {
 public:
  SingularityError(const std::string& what, double limit)
      : DomainError(what), limit_(limit) {}

  double limit() const { return limit_; }

 private:
  double limit_;
};

}  // namespace snakecpg
