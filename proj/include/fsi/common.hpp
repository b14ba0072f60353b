#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fsi {

using Index = std::int32_t;

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsi
