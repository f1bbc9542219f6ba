#pragma once

#include "orthofrac/types.hpp"

namespace orthofrac {

/// Reference orthotropic constants of the graded solid (N, mm, MPa).
struct OrthotropicBase {
  double E1 = 114800.0;   ///< longitudinal modulus along the fibre axis
  double E2 = 11700.0;    ///< transverse modulus
  double G12 = 9660.0;    ///< in-plane shear modulus
  double nu12 = 0.21;     ///< major Poisson ratio
  double Gc = 2.7;        ///< critical energy release rate, N/mm
  double theta = 0.0;     ///< fibre angle measured from the x axis, radians

  /// Throws DegenerateMaterial naming the offending field.
  void validate() const;
};

enum class GradingDirection { none, x, y };

/// Exponential grading E(s) = E0 exp(index * s), s in [0, 1].
struct GradationSpec {
  GradingDirection direction = GradingDirection::none;
  double alpha = 0.0;      ///< index for E1
  double beta_idx = 0.0;   ///< index for E2 and G12
  double gamma = 0.0;      ///< index for Gc
  bool grade_toughness = false;
  double reference_length = 1.0;
  double origin = 0.0;     ///< coordinate where s = 0

  /// Normalized grading coordinate of x, clamped to [0, 1].
  double coordinate(const Vec2& x) const;
};

struct PointProperties {
  double E1 = 0.0;
  double E2 = 0.0;
  double G12 = 0.0;
  double nu12 = 0.0;
  double nu21 = 0.0;
  double Gc = 0.0;
};

struct LameConstants {
  double lambda = 0.0;
  double mu = 0.0;
};

/// Voigt-notation rotation used to bring Q into the global frame.
enum class RotationConvention {
  printed,   ///< [[c, s, 0], [-s, c, 0], [0, 0, 1]]
  tensor,    ///< engineering-strain transformation with c^2, s^2, cs terms
};

/// Isotropic pair used by the tensile/compressive energy split.
enum class EffectiveLame {
  longitudinal,  ///< (E1, nu12)
  transverse,    ///< (E2, nu21)
};

PointProperties evaluate_properties(const OrthotropicBase& base, const GradationSpec& grad,
                                    const Vec2& x);

/// Plane-stress reduced stiffness. Throws DegenerateMaterial if 1 - nu12 nu21 <= 0.
Mat3 reduced_stiffness(const PointProperties& p);

/// D = T^T Q T.
Mat3 constitutive_matrix(const Mat3& Q, double theta,
                         RotationConvention convention = RotationConvention::printed);

Mat3 rotation_matrix(double theta, RotationConvention convention);

/// Plane-stress Lame constants lambda = E nu / (1 - nu^2), mu = E / (2 (1 + nu)).
LameConstants effective_lame(const PointProperties& p,
                             EffectiveLame choice = EffectiveLame::longitudinal);

}  // namespace orthofrac
