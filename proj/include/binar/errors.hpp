#pragma once

#include <stdexcept>
#include <string>

namespace binar {

/// A computation produced a value outside its mathematical domain, or an
/// iterative routine gave up. Invalid *inputs* use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV rows, JSON documents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace binar
