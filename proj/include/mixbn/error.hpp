#pragma once

#include <stdexcept>
#include <string>

namespace mixbn {

/// Malformed or inconsistent user input (files, flags, schemas).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a finite result even after
/// jitter or ridge fallbacks.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixbn
