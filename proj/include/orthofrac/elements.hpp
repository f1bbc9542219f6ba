#pragma once

#include <array>
#include <span>
#include <vector>

#include "orthofrac/types.hpp"

namespace orthofrac {

enum class ElementKind { quad, polygon };

/// Shape functions of one element at one point.
struct ShapeEvaluation {
  Vec2 x = Vec2::Zero();                       ///< physical point
  Eigen::VectorXd N;                           ///< value per element node
  Eigen::Matrix<double, Eigen::Dynamic, 2> dN; ///< physical gradient per node, 1/mm
  double weight = 0.0;                         ///< quadrature weight times Jacobian, mm^2
};

struct QuadraturePoint {
  Vec2 x;
  double weight = 0.0;
};

using Triangle = std::array<Vec2, 3>;

struct BMatrices {
  Eigen::Matrix<double, 3, Eigen::Dynamic> B;     ///< rows exx, eyy, gxy; columns (u0, v0, u1, ...)
  Eigen::Matrix<double, 2, Eigen::Dynamic> Bphi;  ///< scalar gradient
};

/// Bilinear quad at reference point xi in [-1, 1]^2. Corners are counter-clockwise starting at
/// (-1, -1). `weight` holds det J. Throws GeometryError for a singular Jacobian.
ShapeEvaluation quad_shape(const Vec2& xi, std::span<const Vec2> corners);

/// Mean-value coordinates of x in a counter-clockwise polygon, with analytic gradients.
///
/// On a vertex the values are the Kronecker delta; on an edge they reduce to linear
/// interpolation between its end points. Gradients are only provided strictly inside
/// (zero otherwise). Throws GeometryError if x lies outside the polygon.
ShapeEvaluation mean_value_shape(const Vec2& x, std::span<const Vec2> vertices);

double signed_area(std::span<const Vec2> vertices);
Vec2 polygon_centroid(std::span<const Vec2> vertices);

/// Fan triangulation from the area centroid; one triangle per polygon edge.
std::vector<Triangle> triangulate_polygon(std::span<const Vec2> vertices);

/// Quads: order x order Gauss rule. Polygons: per fan triangle, order 1 -> 1 point,
/// 2 -> 3 points, 3 -> 6 points (degree 4), 4 -> 7 points (degree 5).
std::vector<QuadraturePoint> quadrature_points(std::span<const Vec2> vertices, ElementKind kind,
                                               int order);

/// Shape evaluations at the quadrature points of `quadrature_points`.
std::vector<ShapeEvaluation> element_shapes(std::span<const Vec2> vertices, ElementKind kind,
                                            int order);

/// Shape values (no gradients needed) of an element at an arbitrary point inside it.
Eigen::VectorXd element_values_at(std::span<const Vec2> vertices, ElementKind kind,
                                  const Vec2& x);

BMatrices b_matrices(const ShapeEvaluation& shape);

/// Gauss-Legendre abscissae and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights);

}  // namespace orthofrac
