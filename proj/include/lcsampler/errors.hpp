#pragma once

#include <stdexcept>
#include <string>

namespace lcs {

// Root of every error thrown by the library. The CLI maps any of these to a
// nonzero exit status with the message printed on stderr.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Curve parameters or fit inputs outside the model's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed arguments: empty lists, equal volumes, unsorted grids.
class InputError : public Error {
 public:
  using Error::Error;
};

// Structurally wrong files: missing header, missing target rows, bad JSON keys.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A field parsed fine but holds an out-of-range value.
class ValueError : public Error {
 public:
  using Error::Error;
};

// Duplicate (model_id, volume, repetition) key.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Unknown (model_id, volume) pair or preset name.
class LookupError : public Error {
 public:
  using Error::Error;
};

// The budget does not cover a single repetition of the plan.
class InfeasibleBudgetError : public Error {
 public:
  using Error::Error;
};

// Asked for a power-law prediction from a rank-only fit.
class UnsupportedMethodError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcs
