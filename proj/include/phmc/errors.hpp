#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phmc {

// Two fields or a field and a covariance disagree on dimension or representation.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A trajectory left the finite range (non-finite or |x| > divergence threshold).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A chain or coupling step failed; carries the iteration at which it happened.
class ChainError : public std::runtime_error {
 public:
  ChainError(const std::string& what, std::size_t iteration, bool divergence)
      : std::runtime_error(what), iteration_(iteration), divergence_(divergence) {}
  std::size_t iteration() const noexcept { return iteration_; }
  bool is_divergence() const noexcept { return divergence_; }

 private:
  std::size_t iteration_;
  bool divergence_;
};

// Invalid experiment configuration; names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace phmc
