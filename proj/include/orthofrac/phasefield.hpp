#pragma once

#include "orthofrac/types.hpp"

namespace orthofrac {

/// Which axis the structural tensor treats as the cheap-gradient direction n.
enum class StructuralAxis {
  /// n is the normal of the cleavage plane, (-sin t, cos t): cracks run along the fibres.
  cleavage_normal,
  /// n = (cos t, sin t) taken literally: cracks run across the fibres.
  fibre,
};

struct PhaseFieldParams {
  double ell0 = 0.0;           ///< length scale, mm
  double beta_penalty = 20.0;  ///< anisotropy penalty of the structural tensor
  double k_p = 1.0e-6;         ///< residual stiffness
  StructuralAxis axis = StructuralAxis::cleavage_normal;

  /// Angle fed to structural_tensor for a material with fibre angle theta.
  double structural_angle(double theta) const;
  void validate() const;
};

struct EnergySplit {
  double plus = 0.0;
  double minus = 0.0;
};

/// A = I + beta (I - n n^T), n = (cos angle, sin angle).
Mat2 structural_tensor(double angle, double beta_penalty);

/// (1 - phi)^2 + k_p
inline double degradation(double phi, double k_p) {
  const double a = 1.0 - phi;
  return a * a + k_p;
}

/// Principal split psi+- = lambda/2 <tr e>+-^2 + mu tr(e+-^2) of a symmetric 2x2 strain.
EnergySplit spectral_split(const Mat2& eps, double lambda, double mu);

/// Undecomposed energy lambda/2 (tr e)^2 + mu tr(e^2).
double strain_energy(const Mat2& eps, double lambda, double mu);

/// Principal strains (ascending) and unit directions (columns) of a symmetric 2x2 tensor.
void principal_strains(const Mat2& eps, Eigen::Vector2d& values, Mat2& directions);

inline double update_history(double H_old, double psi_plus) {
  return H_old > psi_plus ? H_old : psi_plus;
}

/// Returns 0 where psi+ < psi- (no damage in compression), phi otherwise.
inline double hybrid_constraint(double psi_plus, double psi_minus, double phi) {
  return psi_plus < psi_minus ? 0.0 : phi;
}

}  // namespace orthofrac
