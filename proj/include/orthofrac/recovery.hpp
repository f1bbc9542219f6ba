#pragma once

#include <functional>
#include <span>
#include <vector>

#include "orthofrac/mesh.hpp"
#include "orthofrac/types.hpp"

namespace orthofrac {

/// Discontinuity seen by the MLS weights: a polyline from the mouth to the tip.
struct CrackGeometry {
  std::vector<Vec2> vertices;

  bool empty() const { return vertices.size() < 2; }
  const Vec2& tip() const { return vertices.back(); }
  /// True when segment p-q crosses the polyline. Touching an end point or a segment
  /// does not count.
  bool cuts(const Vec2& p, const Vec2& q) const;
};

struct MlsConfig {
  double support_factor = 2.5;  ///< d_k = factor * diameter of the largest adjacent element
  int min_neighbors = 4;        ///< must exceed the basis size 3
  double growth = 1.5;          ///< support enlargement on poor coverage
  int max_growth_attempts = 3;
  double max_condition = 1e12;

  void validate() const;
};

/// Fourth-order spline 1 - 6s^2 + 8s^3 - 3s^4 on [0, 1], zero beyond.
double spline_weight(double s);
double spline_weight_derivative(double s);

/// Normalized distance from node x_k to x, routed through the crack tip when the
/// straight segment is cut by the crack.
double diffraction_distance(const Vec2& x, const Vec2& x_k, double d_k, const CrackGeometry& crack);

/// Gradient of diffraction_distance with respect to x.
Vec2 diffraction_distance_gradient(const Vec2& x, const Vec2& x_k, double d_k,
                                   const CrackGeometry& crack);

struct MlsShape {
  Eigen::VectorXd psi;
  Eigen::Matrix<double, Eigen::Dynamic, 2> dpsi;
};

/// Linear-basis MLS shape functions psi = p^T A^-1 B at x and their analytic derivatives,
/// given per-node weights and weight gradients. The basis is centered on x and scaled by
/// `length` for conditioning. Throws InsufficientCoverage when fewer than
/// config.min_neighbors weights are positive or cond(A) exceeds config.max_condition.
MlsShape mls_shape(const Vec2& x, std::span<const Vec2> nodes, std::span<const double> weights,
                   std::span<const Vec2> weight_gradients, const MlsConfig& config,
                   double length = 1.0);

/// Nodes, support radii and crack used to build the recovered field of a mesh.
class MlsRecovery {
 public:
  MlsRecovery(const QuadtreeMesh& mesh, const CrackGeometry& crack, const MlsConfig& config);

  /// Shape functions over the returned node ids (enlarging supports if needed).
  MlsShape shape_at(const Vec2& x, std::vector<int>& node_ids) const;

  /// Recovered (smoothed) symmetric strain at x from nodal displacements (u0, v0, u1, ...).
  Mat2 recovered_strain(const Vec2& x, const Eigen::VectorXd& u) const;

  double support_radius(int node) const { return radius_[node]; }

 private:
  void candidates(const Vec2& x, double factor, std::vector<int>& out) const;

  const QuadtreeMesh& mesh_;
  CrackGeometry crack_;
  MlsConfig config_;
  std::vector<Vec2> position_;  ///< visibility position (notch copies nudged to their side)
  std::vector<double> radius_;
  double max_radius_ = 0.0;
  // bucket grid
  Vec2 grid_lo_;
  double bucket_ = 1.0;
  int nbx_ = 1, nby_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Compatible finite-element strain of element e at a shape evaluation.
Mat2 element_strain(const MeshElement& element, const ShapeEvaluation& shape,
                    const Eigen::VectorXd& u);

using StrainField = std::function<Mat2(const Vec2&)>;

/// sqrt of the integral of |e - recovered|_F^2 over element e.
double element_error(const QuadtreeMesh& mesh, int e, const StrainField& recovered,
                     const Eigen::VectorXd& u, int order = 2);

/// sqrt of the integral of |e - e_s|_F^2 over element e (element quadrature rule).
double element_error(const QuadtreeMesh& mesh, int e, const MlsRecovery& recovery,
                     const Eigen::VectorXd& u, int order = 2);

/// sqrt(sum e_i^2)
double global_error(std::span<const double> element_errors);

/// Error map of every element; `threads` > 1 splits the element loop.
ErrorMap compute_error_map(const QuadtreeMesh& mesh, const CrackGeometry& crack,
                           const MlsConfig& config, const Eigen::VectorXd& u, int threads = 1);

}  // namespace orthofrac
