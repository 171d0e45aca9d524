#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lpose {

// Base class so callers can catch toolkit errors as one family.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically unusable input (zero-length axis, parallel 6D columns, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Point configuration does not determine the transform (collinear cloud,
// coplanar PnP points, rank-deficient covariance).
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// One or more points at or behind the camera plane. Carries the offending
// indices so callers can report or filter them.
class BehindCamera : public Error {
 public:
  BehindCamera(const std::string& msg, std::vector<int> indices)
      : Error(msg), indices_(std::move(indices)) {}
  const std::vector<int>& indices() const { return indices_; }

 private:
  std::vector<int> indices_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class MeshLoadError : public Error {
 public:
  using Error::Error;
};

// Pose sampling could not place the object in view within the retry budget.
class Unplaceable : public Error {
 public:
  using Error::Error;
};

}  // namespace lpose
