#include "orthofrac/elements.hpp"

#include <cmath>
#include <numbers>

namespace orthofrac {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double polygon_scale(std::span<const Vec2> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s = std::max(s, (v[(i + 1) % v.size()] - v[i]).norm());
  return s;
}

struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;  // sum to one
};

TriangleRule triangle_rule(int order) {
  TriangleRule r;
  auto add3 = [&r](double a, double b, double w) {
    r.bary.push_back({a, b, b});
    r.bary.push_back({b, a, b});
    r.bary.push_back({b, b, a});
    r.weights.insert(r.weights.end(), 3, w);
  };
  switch (order) {
    case 1:
      r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(1.0);
      break;
    case 2:
      add3(2.0 / 3, 1.0 / 6, 1.0 / 3);
      break;
    case 3:
      add3(1.0 - 2 * 0.445948490915965, 0.445948490915965, 0.223381589678011);
      add3(1.0 - 2 * 0.091576213509771, 0.091576213509771, 0.109951743655322);
      break;
    case 4:
      r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(0.225);
      add3(0.059715871789770, 0.470142064105115, 0.132394152788506);
      add3(0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    default:
      throw GeometryError("unsupported triangle quadrature order " + std::to_string(order));
  }
  return r;
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights) {
  if (n < 1 || n > 10) throw GeometryError("unsupported Gauss order " + std::to_string(n));
  points.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    points[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

ShapeEvaluation quad_shape(const Vec2& xi, std::span<const Vec2> corners) {
  if (corners.size() != 4) throw GeometryError("quad_shape needs 4 corners");
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  ShapeEvaluation s;
  s.N.resize(4);
  Eigen::Matrix<double, 4, 2> dref;
  for (int k = 0; k < 4; ++k) {
    s.N[k] = 0.25 * (1.0 + sx[k] * xi.x()) * (1.0 + sy[k] * xi.y());
    dref(k, 0) = 0.25 * sx[k] * (1.0 + sy[k] * xi.y());
    dref(k, 1) = 0.25 * sy[k] * (1.0 + sx[k] * xi.x());
  }
  Mat2 J = Mat2::Zero();  // J(a, b) = d x_b / d xi_a
  s.x.setZero();
  for (int k = 0; k < 4; ++k) {
    J.row(0) += dref(k, 0) * corners[k].transpose();
    J.row(1) += dref(k, 1) * corners[k].transpose();
    s.x += s.N[k] * corners[k];
  }
  const double det = J.determinant();
  const double scale = (corners[2] - corners[0]).squaredNorm();
  if (!(det > 1e-14 * scale)) throw GeometryError("quad_shape: singular or inverted Jacobian");
  const Mat2 Jinv = J.inverse();
  s.dN.resize(4, 2);
  for (int k = 0; k < 4; ++k) {
    s.dN.row(k) = (Jinv * dref.row(k).transpose()).transpose();
  }
  s.weight = det;
  return s;
}

ShapeEvaluation mean_value_shape(const Vec2& x, std::span<const Vec2> vertices) {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw GeometryError("mean_value_shape: polygon needs at least 3 vertices");
  ShapeEvaluation s;
  s.x = x;
  s.N = Eigen::VectorXd::Zero(n);
  s.dN = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(n, 2);

  const double scale = polygon_scale(vertices);
  const double tol = 1e-12 * scale;
  std::vector<Vec2> d(n);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    d[i] = vertices[i] - x;
    r[i] = d[i].norm();
    if (r[i] <= tol) {
      s.N[i] = 1.0;
      return s;
    }
  }
  std::vector<double> C(n), D(n);
  double winding = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    C[i] = cross(d[i], d[j]);
    D[i] = d[i].dot(d[j]);
    if (std::abs(C[i]) <= 1e-12 * r[i] * r[j] && D[i] < 0.0) {
      // on edge i -> j
      const double t = r[i] / (r[i] + r[j]);
      s.N[i] = 1.0 - t;
      s.N[j] = t;
      return s;
    }
    winding += std::atan2(C[i], D[i]);
  }
  if (winding < std::numbers::pi) {
    throw GeometryError("mean_value_shape: point lies outside the polygon");
  }

  // tan(a/2) = C / (r_i r_j + D), stable for the interior angles seen from x
  std::vector<double> t(n);
  std::vector<Vec2> dt(n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const double P = r[i] * r[j];
    const double den = P + D[i];
    t[i] = C[i] / den;
    const Vec2 dC(d[i].y() - d[j].y(), d[j].x() - d[i].x());
    const Vec2 dD = -(d[i] + d[j]);
    const Vec2 dP = -(r[j] / r[i] * d[i] + r[i] / r[j] * d[j]);
    dt[i] = (dC * den - C[i] * (dP + dD)) / (den * den);
  }
  Eigen::VectorXd w(n);
  Eigen::Matrix<double, Eigen::Dynamic, 2> dw(n, 2);
  for (int i = 0; i < n; ++i) {
    const int h = (i + n - 1) % n;
    const double num = t[h] + t[i];
    w[i] = num / r[i];
    const Vec2 g = (dt[h] + dt[i]) / r[i] + num * d[i] / (r[i] * r[i] * r[i]);
    dw.row(i) = g.transpose();
  }
  const double W = w.sum();
  const Eigen::RowVector2d dW = dw.colwise().sum();
  s.N = w / W;
  for (int i = 0; i < n; ++i) s.dN.row(i) = (dw.row(i) - s.N[i] * dW) / W;
  return s;
}

double signed_area(std::span<const Vec2> v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

Vec2 polygon_centroid(std::span<const Vec2> v) {
  const double A = signed_area(v);
  if (A == 0.0) throw GeometryError("polygon_centroid: zero-area polygon");
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    c += (p + q) * cross(p, q);
  }
  return c / (6.0 * A);
}

std::vector<Triangle> triangulate_polygon(std::span<const Vec2> vertices) {
  if (vertices.size() < 3) throw GeometryError("triangulate_polygon: fewer than 3 vertices");
  const double scale = polygon_scale(vertices);
  if (!(signed_area(vertices) > 1e-12 * scale * scale)) {
    throw GeometryError("triangulate_polygon: degenerate or clockwise polygon");
  }
  const Vec2 c = polygon_centroid(vertices);
  std::vector<Triangle> tris;
  tris.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    tris.push_back({c, vertices[i], vertices[(i + 1) % vertices.size()]});
  }
  return tris;
}

std::vector<QuadraturePoint> quadrature_points(std::span<const Vec2> vertices, ElementKind kind,
                                               int order) {
  std::vector<QuadraturePoint> out;
  if (kind == ElementKind::quad) {
    std::vector<double> p, w;
    gauss_legendre(order, p, w);
    for (int j = 0; j < order; ++j) {
      for (int i = 0; i < order; ++i) {
        const ShapeEvaluation s = quad_shape(Vec2(p[i], p[j]), vertices);
        out.push_back({s.x, w[i] * w[j] * s.weight});
      }
    }
    return out;
  }
  const TriangleRule rule = triangle_rule(order);
  for (const Triangle& tri : triangulate_polygon(vertices)) {
    const double area = 0.5 * cross(tri[1] - tri[0], tri[2] - tri[0]);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.bary[q];
      out.push_back({b[0] * tri[0] + b[1] * tri[1] + b[2] * tri[2], rule.weights[q] * area});
    }
  }
  return out;
}

std::vector<ShapeEvaluation> element_shapes(std::span<const Vec2> vertices, ElementKind kind,
                                            int order) {
  std::vector<ShapeEvaluation> out;
  if (kind == ElementKind::quad) {
    std::vector<double> p, w;
    gauss_legendre(order, p, w);
    for (int j = 0; j < order; ++j) {
      for (int i = 0; i < order; ++i) {
        ShapeEvaluation s = quad_shape(Vec2(p[i], p[j]), vertices);
        s.weight *= w[i] * w[j];
        out.push_back(std::move(s));
      }
    }
    return out;
  }
  for (const QuadraturePoint& qp : quadrature_points(vertices, kind, order)) {
    ShapeEvaluation s = mean_value_shape(qp.x, vertices);
    s.weight = qp.weight;
    out.push_back(std::move(s));
  }
  // Mean-value gradients are rational, so the fan rule does not integrate them exactly. A
  // constant shift per node makes sum_q w_q dN_i equal the boundary integral of N_i n, which
  // N_i (linear on edges) gives in closed form; this restores the patch test.
  const int n = static_cast<int>(vertices.size());
  double area = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, 2> mismatch = Eigen::MatrixXd::Zero(n, 2);
  for (const auto& s : out) {
    area += s.weight;
    mismatch -= s.weight * s.dN;
  }
  for (int i = 0; i < n; ++i) {
    const Vec2 chord = vertices[(i + 1) % n] - vertices[(i + n - 1) % n];
    mismatch(i, 0) += 0.5 * chord.y();
    mismatch(i, 1) -= 0.5 * chord.x();
  }
  mismatch /= area;
  for (auto& s : out) s.dN += mismatch;
  return out;
}

Eigen::VectorXd element_values_at(std::span<const Vec2> vertices, ElementKind kind,
                                  const Vec2& x) {
  if (kind == ElementKind::polygon) return mean_value_shape(x, vertices).N;
  // Newton inversion of the bilinear map
  Vec2 xi = Vec2::Zero();
  for (int it = 0; it < 20; ++it) {
    const ShapeEvaluation s = quad_shape(xi, vertices);
    const Vec2 res = x - s.x;
    Mat2 J;  // d x / d xi
    J.setZero();
    static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
    static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
    for (int k = 0; k < 4; ++k) {
      J.col(0) += 0.25 * sx[k] * (1.0 + sy[k] * xi.y()) * vertices[k];
      J.col(1) += 0.25 * sy[k] * (1.0 + sx[k] * xi.x()) * vertices[k];
    }
    const Vec2 dxi = J.inverse() * res;
    xi += dxi;
    if (dxi.norm() < 1e-14) break;
  }
  const double slack = 1e-9;
  if (std::abs(xi.x()) > 1.0 + slack || std::abs(xi.y()) > 1.0 + slack) {
    throw GeometryError("element_values_at: point lies outside the quad");
  }
  xi = xi.cwiseMax(-1.0).cwiseMin(1.0);
  return quad_shape(xi, vertices).N;
}

BMatrices b_matrices(const ShapeEvaluation& shape) {
  const int n = static_cast<int>(shape.N.size());
  BMatrices m;
  m.B = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 2 * n);
  m.Bphi.resize(2, n);
  for (int k = 0; k < n; ++k) {
    const double dx = shape.dN(k, 0);
    const double dy = shape.dN(k, 1);
    m.B(0, 2 * k) = dx;
    m.B(1, 2 * k + 1) = dy;
    m.B(2, 2 * k) = dy;
    m.B(2, 2 * k + 1) = dx;
    m.Bphi(0, k) = dx;
    m.Bphi(1, k) = dy;
  }
  return m;
}

}  // namespace orthofrac
