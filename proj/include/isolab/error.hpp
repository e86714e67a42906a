#pragma once

#include <stdexcept>
#include <string>

namespace isolab {

/// Base exception for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent on-disk corpus.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numeric precondition failed (zero norm, too few samples, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Requested layer / token / parameter outside what the input provides.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace isolab
