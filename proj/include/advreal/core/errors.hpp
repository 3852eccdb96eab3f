#pragma once

#include <stdexcept>
#include <string>

namespace advreal {

/// Input violates an operation's precondition (bad shape, empty mesh, invalid box).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or an ill-conditioned solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or format failure while reading/writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace advreal
