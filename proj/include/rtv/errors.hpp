#pragma once

#include <stdexcept>
#include <string>

namespace rtv {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies on or behind the camera plane (depth <= 0).
class NonPositiveDepth : public Error {
 public:
  using Error::Error;
};

/// Fewer than two usable observations from distinct views.
class InsufficientViews : public Error {
 public:
  using Error::Error;
};

/// Triangulation produced a point at or near infinity, or the camera
/// pair has no usable baseline.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Normalization box has non-positive width or height.
class EmptyBBox : public Error {
 public:
  using Error::Error;
};

/// Two poses being compared have different joint counts.
class JointCountMismatch : public Error {
 public:
  using Error::Error;
};

/// A pose is empty or its root index is out of range.
class DegeneratePose : public Error {
 public:
  using Error::Error;
};

/// The triangulation system is too ill-conditioned to differentiate:
/// the two smallest singular values nearly coincide.
class GradientDegenerate : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates its documented range.
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or command-line value.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtv
