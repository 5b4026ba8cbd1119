#pragma once

#include <stdexcept>
#include <string>

namespace bvm {

/// Precondition or estimation failure raised by the core library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema failure while reading a scenario config. `field` is a JSON pointer
/// to the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace bvm
