#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace senticf {

/// Dense index of an interned user or item.
using Index = std::int32_t;

/// Raised for bad input, bad configuration, or a violated precondition the
/// caller can fix. The CLI maps it to exit code 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input table does not carry the configured columns.
class SchemaError : public UserError {
 public:
  using UserError::UserError;
};

}  // namespace senticf
