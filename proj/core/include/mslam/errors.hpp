#pragma once

#include <stdexcept>
#include <string>

namespace mslam {

/// Inputs violate an operation precondition (non-finite values, empty
/// containers, mismatched sizes, out-of-range indices).
class InvalidArgumentError : public std::invalid_argument {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// The point configuration cannot determine a similarity transform
/// (collinear points, vanishing source variance).
class DegenerateGeometryError : public std::runtime_error {
 public:
  explicit DegenerateGeometryError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Too few valid correspondences to run a registration.
class InsufficientCorrespondencesError : public std::runtime_error {
 public:
  explicit InsufficientCorrespondencesError(const std::string& what)
      : std::runtime_error(what) {}
};

/// An anchor could not be selected, so the edge cannot be formed.
class MissingAnchorError : public std::runtime_error {
 public:
  explicit MissingAnchorError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A file is syntactically malformed; message carries the line number.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A file parsed but its contents violate a documented constraint
/// (e.g. a quaternion too far from unit norm).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// The optimizer produced a non-finite cost or state.
class NumericalFailureError : public std::runtime_error {
 public:
  explicit NumericalFailureError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mslam
