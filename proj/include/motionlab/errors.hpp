#pragma once

#include <stdexcept>
#include <string>

namespace motionlab {

// Base of all library errors. Two branches matter for exit-code mapping:
// DataError (malformed or inconsistent input) and NumericalError (a
// computation that cannot proceed).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class GridMismatch : public DataError {
 public:
  using DataError::DataError;
};

class BadInterval : public DataError {
 public:
  using DataError::DataError;
};

class GridTooCoarse : public DataError {
 public:
  using DataError::DataError;
};

class ZeroBoneError : public DataError {
 public:
  ZeroBoneError(int part, const std::string& what) : DataError(what), part(part) {}
  int part;
};

class EmptyWindowError : public DataError {
 public:
  using DataError::DataError;
};

// Geodesic between (near-)antipodal sphere points is not unique.
class AntipodalError : public NumericalError {
 public:
  AntipodalError(int part, const std::string& what) : NumericalError(what), part(part) {}
  int part;  // offending part index, -1 if not applicable
};

class NotTangentError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularCovariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RejectionStall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Iterative fits report convergence instead of throwing; callers that care
// pass a FitReport and inspect it.
struct FitReport {
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
};

}  // namespace motionlab
