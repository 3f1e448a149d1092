#pragma once

#include <stdexcept>
#include <string>

namespace toral {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed numeric input (non-finite entries, shape mismatch).
class InputError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A principal logarithm was requested at a spectrum touching the branch point -1.
class BranchError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// An iterative routine could not reach its residual target.
class DiagnosticsError : public Error {
 public:
  DiagnosticsError(const std::string& what, double worst_residual)
      : Error(what + " (worst residual " + std::to_string(worst_residual) + ")"),
        worst_residual_(worst_residual) {}

  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

// File or JSON decoding failure; the message names the offending path.
class DecodeError : public Error {
 public:
  using Error::Error;
};

}  // namespace toral
