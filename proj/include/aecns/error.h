// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_ERROR_H_
#define AECNS_ERROR_H_

#include <stdexcept>
#include <string>

namespace aecns {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented contract: bad files, non-finite samples,
// mismatched shapes. The CLI maps this to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad configuration or arguments. Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// An internal invariant did not hold. Exit code 3.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace aecns

#endif  // AECNS_ERROR_H_
