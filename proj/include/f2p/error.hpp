#pragma once

#include <stdexcept>

namespace f2p {

/// Base exception for every recoverable failure in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A training loss or metric became non-finite.
class Divergence : public Error {
 public:
  using Error::Error;
};

}  // namespace f2p
