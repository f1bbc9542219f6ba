#include "orthofrac/material.hpp"

#include <algorithm>
#include <cmath>

namespace orthofrac {

void OrthotropicBase::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DegenerateMaterial(std::string("material.") + name + " must be positive, got " +
                               std::to_string(v));
    }
  };
  require_positive(E1, "E1");
  require_positive(E2, "E2");
  require_positive(G12, "G12");
  require_positive(Gc, "Gc");
  const double nu21 = E2 / E1 * nu12;
  if (!(1.0 - nu12 * nu21 > 0.0)) {
    throw DegenerateMaterial("material.nu12: 1 - nu12*nu21 must be positive");
  }
}

double GradationSpec::coordinate(const Vec2& x) const {
  double c = 0.0;
  switch (direction) {
    case GradingDirection::none:
      return 0.0;
    case GradingDirection::x:
      c = x.x();
      break;
    case GradingDirection::y:
      c = x.y();
      break;
  }
  return std::clamp((c - origin) / reference_length, 0.0, 1.0);
}

PointProperties evaluate_properties(const OrthotropicBase& base, const GradationSpec& grad,
                                    const Vec2& x) {
  PointProperties p;
  p.nu12 = base.nu12;
  if (grad.direction == GradingDirection::none) {
    p.E1 = base.E1;
    p.E2 = base.E2;
    p.G12 = base.G12;
    p.Gc = base.Gc;
  } else {
    const double s = grad.coordinate(x);
    p.E1 = base.E1 * std::exp(grad.alpha * s);
    p.E2 = base.E2 * std::exp(grad.beta_idx * s);
    p.G12 = base.G12 * std::exp(grad.beta_idx * s);
    p.Gc = grad.grade_toughness ? base.Gc * std::exp(grad.gamma * s) : base.Gc;
  }
  p.nu21 = p.E2 / p.E1 * p.nu12;
  return p;
}

Mat3 reduced_stiffness(const PointProperties& p) {
  const double denom = 1.0 - p.nu12 * p.nu21;
  if (!(denom > 0.0)) {
    throw DegenerateMaterial("reduced stiffness: 1 - nu12*nu21 = " + std::to_string(denom) +
                             " is not positive");
  }
  Mat3 Q = Mat3::Zero();
  Q(0, 0) = p.E1 / denom;
  Q(1, 1) = p.E2 / denom;
  Q(0, 1) = Q(1, 0) = p.nu12 * p.E2 / denom;
  Q(2, 2) = p.G12;
  return Q;
}

Mat3 rotation_matrix(double theta, RotationConvention convention) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 T;
  if (convention == RotationConvention::printed) {
    T << c, s, 0.0,
        -s, c, 0.0,
        0.0, 0.0, 1.0;
  } else {
    // Maps global engineering strains {exx, eyy, gxy} to the material frame.
    T << c * c, s * s, c * s,
        s * s, c * c, -c * s,
        -2.0 * c * s, 2.0 * c * s, c * c - s * s;
  }
  return T;
}

Mat3 constitutive_matrix(const Mat3& Q, double theta, RotationConvention convention) {
  const Mat3 T = rotation_matrix(theta, convention);
  Mat3 D = T.transpose() * Q * T;
  // exact symmetry
  D = 0.5 * (D + D.transpose()).eval();
  return D;
}

LameConstants effective_lame(const PointProperties& p, EffectiveLame choice) {
  const double E = choice == EffectiveLame::longitudinal ? p.E1 : p.E2;
  const double nu = choice == EffectiveLame::longitudinal ? p.nu12 : p.nu21;
  return {E * nu / (1.0 - nu * nu), E / (2.0 * (1.0 + nu))};
}

}  // namespace orthofrac
