#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace orthofrac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateMaterial : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

/// MLS moment matrix could not be inverted with the available nodes.
class InsufficientCoverage : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned rectangle [origin, origin + (width, height)].
struct Domain {
  Vec2 origin = Vec2::Zero();
  double width = 1.0;
  double height = 1.0;

  double area() const { return width * height; }
  double scale() const { return std::max(width, height); }
};

}  // namespace orthofrac
