#include "orthofrac/phasefield.hpp"

#include <cmath>
#include <numbers>

namespace orthofrac {

double PhaseFieldParams::structural_angle(double theta) const {
  return axis == StructuralAxis::cleavage_normal ? theta + 0.5 * std::numbers::pi : theta;
}

void PhaseFieldParams::validate() const {
  if (!(ell0 > 0.0)) throw ConfigError("phasefield.ell0 must be positive");
  if (!(beta_penalty >= 0.0)) throw ConfigError("phasefield.beta_penalty must be non-negative");
  if (!(k_p > 0.0 && k_p < 1.0)) throw ConfigError("phasefield.k_p must lie in (0, 1)");
}

Mat2 structural_tensor(double angle, double beta_penalty) {
  const Vec2 n(std::cos(angle), std::sin(angle));
  const Mat2 I = Mat2::Identity();
  return I + beta_penalty * (I - n * n.transpose());
}

void principal_strains(const Mat2& eps, Eigen::Vector2d& values, Mat2& directions) {
  const double a = eps(0, 0);
  const double d = eps(1, 1);
  const double b = 0.5 * (eps(0, 1) + eps(1, 0));
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  values << mean - radius, mean + radius;
  if (radius == 0.0) {
    directions.setIdentity();
    return;
  }
  // Direction of the larger principal value; the smaller one is its perpendicular.
  const double angle = 0.5 * std::atan2(2.0 * b, a - d);
  const Vec2 n_max(std::cos(angle), std::sin(angle));
  directions.col(1) = n_max;
  directions.col(0) = Vec2(-n_max.y(), n_max.x());
}

EnergySplit spectral_split(const Mat2& eps, double lambda, double mu) {
  Eigen::Vector2d e;
  Mat2 n;
  principal_strains(eps, e, n);
  const double tr = e.sum();
  const double tr_plus = std::max(tr, 0.0);
  const double tr_minus = std::min(tr, 0.0);
  double sq_plus = 0.0;
  double sq_minus = 0.0;
  // tr(e+^2) = sum <e_I>+^2 since the principal directions are orthonormal
  for (int i = 0; i < 2; ++i) {
    if (e[i] > 0.0)
      sq_plus += e[i] * e[i];
    else
      sq_minus += e[i] * e[i];
  }
  return {0.5 * lambda * tr_plus * tr_plus + mu * sq_plus,
          0.5 * lambda * tr_minus * tr_minus + mu * sq_minus};
}

double strain_energy(const Mat2& eps, double lambda, double mu) {
  const double tr = eps.trace();
  return 0.5 * lambda * tr * tr + mu * (eps * eps).trace();
}

}  // namespace orthofrac
