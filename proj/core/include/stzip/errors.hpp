#ifndef STZIP_ERRORS_HPP
#define STZIP_ERRORS_HPP

#include <optional>
#include <stdexcept>
#include <string>

namespace stzip {

/// Invalid model configuration: dimension mismatches, bad hyperparameters,
/// malformed config documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. Carries the 1-based data row when known.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what,
                      std::optional<long> row = std::nullopt)
      : std::runtime_error(what), row_(row) {}

  std::optional<long> row() const noexcept { return row_; }

 private:
  std::optional<long> row_;
};

/// Factorization failure or a degenerate distribution inside a sampler step.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::string block = {},
                          std::optional<long> iteration = std::nullopt)
      : std::runtime_error(what),
        block_(std::move(block)),
        iteration_(iteration) {}

  const std::string& block() const noexcept { return block_; }
  std::optional<long> iteration() const noexcept { return iteration_; }

 private:
  std::string block_;
  std::optional<long> iteration_;
};

}  // namespace stzip

#endif  // STZIP_ERRORS_HPP
