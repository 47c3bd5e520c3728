#pragma once

#include <stdexcept>
#include <string>

namespace svceco {

/// Bad invocation or unreadable input. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input was readable but violates a data contract (schema, duplicate id,
/// insufficient samples). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svceco
