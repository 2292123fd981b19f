#pragma once

#include <stdexcept>
#include <string>

namespace clarifystl {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace clarifystl
