#include "orthofrac/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace orthofrac {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
  const double d1 = cross(q - p, a - p);
  const double d2 = cross(q - p, b - p);
  const double d3 = cross(b - a, p - a);
  const double d4 = cross(b - a, q - a);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

}  // namespace

bool CrackGeometry::cuts(const Vec2& p, const Vec2& q) const {
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    if (segments_cross(p, q, vertices[k], vertices[k + 1])) return true;
  }
  return false;
}

void MlsConfig::validate() const {
  if (!(support_factor > 0.0)) throw ConfigError("mesh.support_factor must be positive");
  if (min_neighbors <= 3) throw ConfigError("mesh.min_neighbors must exceed the basis size 3");
  if (!(growth > 1.0)) throw ConfigError("MLS support growth must exceed 1");
}

double spline_weight(double s) {
  s = std::abs(s);
  if (s > 1.0) return 0.0;
  const double s2 = s * s;
  return 1.0 - 6.0 * s2 + 8.0 * s2 * s - 3.0 * s2 * s2;
}

double spline_weight_derivative(double s) {
  s = std::abs(s);
  if (s > 1.0) return 0.0;
  return -12.0 * s + 24.0 * s * s - 12.0 * s * s * s;
}

double diffraction_distance(const Vec2& x, const Vec2& x_k, double d_k, const CrackGeometry& crack) {
  if (!crack.empty() && crack.cuts(x_k, x)) {
    const Vec2& c = crack.tip();
    return ((x - c).norm() + (c - x_k).norm()) / d_k;
  }
  return (x - x_k).norm() / d_k;
}

Vec2 diffraction_distance_gradient(const Vec2& x, const Vec2& x_k, double d_k,
                                   const CrackGeometry& crack) {
  const Vec2 from = (!crack.empty() && crack.cuts(x_k, x)) ? crack.tip() : x_k;
  const Vec2 d = x - from;
  const double r = d.norm();
  if (r == 0.0) return Vec2::Zero();
  return d / (r * d_k);
}

MlsShape mls_shape(const Vec2& x, std::span<const Vec2> nodes, std::span<const double> weights,
                   std::span<const Vec2> weight_gradients, const MlsConfig& config,
                   double length) {
  const int n = static_cast<int>(nodes.size());
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  std::array<Eigen::Matrix3d, 2> dA{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
  std::vector<Eigen::Vector3d> p(n);
  int active = 0;
  for (int i = 0; i < n; ++i) {
    p[i] << 1.0, (nodes[i].x() - x.x()) / length, (nodes[i].y() - x.y()) / length;
    if (weights[i] <= 0.0) continue;
    ++active;
    const Eigen::Matrix3d ppt = p[i] * p[i].transpose();
    A += weights[i] * ppt;
    dA[0] += weight_gradients[i].x() * ppt;
    dA[1] += weight_gradients[i].y() * ppt;
  }
  if (active < config.min_neighbors) {
    throw InsufficientCoverage("MLS: only " + std::to_string(active) + " nodes cover the point");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()[0];
  const double lmax = eig.eigenvalues()[2];
  if (!(lmin > 0.0) || lmax / lmin > config.max_condition) {
    throw InsufficientCoverage("MLS: moment matrix is singular or ill-conditioned");
  }
  const Eigen::LDLT<Eigen::Matrix3d> solver(A);
  const Eigen::Vector3d gamma = solver.solve(Eigen::Vector3d::UnitX());
  std::array<Eigen::Vector3d, 2> dgamma;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector3d pj = Eigen::Vector3d::Zero();
    pj[j + 1] = 1.0 / length;
    dgamma[j] = solver.solve(pj - dA[j] * gamma);
  }
  MlsShape out;
  out.psi.resize(n);
  out.dpsi.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const double gp = gamma.dot(p[i]);
    out.psi[i] = gp * weights[i];
    out.dpsi(i, 0) = dgamma[0].dot(p[i]) * weights[i] + gp * weight_gradients[i].x();
    out.dpsi(i, 1) = dgamma[1].dot(p[i]) * weights[i] + gp * weight_gradients[i].y();
  }
  return out;
}

MlsRecovery::MlsRecovery(const QuadtreeMesh& mesh, const CrackGeometry& crack,
                         const MlsConfig& config)
    : mesh_(mesh), crack_(crack), config_(config) {
  config_.validate();
  const int nn = mesh.num_nodes();
  position_ = mesh.nodes();
  radius_.assign(nn, 0.0);
  std::vector<Vec2> centroid_sum(nn, Vec2::Zero());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const MeshElement& el = mesh.elements()[e];
    const double diameter = mesh.element_size(e) * std::sqrt(2.0);
    const Vec2 center = mesh.tree().bounds(el.cell).center();
    for (int n : el.nodes) {
      radius_[n] = std::max(radius_[n], config_.support_factor * diameter);
      centroid_sum[n] += center - mesh.nodes()[n];
    }
  }
  const double nudge = 1e-7 * mesh.tree().root_size();
  for (int n = 0; n < nn; ++n) {
    if (mesh.node_side(n) != 0 && centroid_sum[n].norm() > 0.0) {
      position_[n] += nudge * centroid_sum[n].normalized();
    }
  }
  double min_radius = std::numeric_limits<double>::infinity();
  for (double r : radius_) {
    max_radius_ = std::max(max_radius_, r);
    min_radius = std::min(min_radius, r);
  }
  const Domain& d = mesh.domain();
  grid_lo_ = d.origin;
  bucket_ = std::max({min_radius, d.width / 512.0, d.height / 512.0});
  nbx_ = std::max(1, static_cast<int>(std::ceil(d.width / bucket_)));
  nby_ = std::max(1, static_cast<int>(std::ceil(d.height / bucket_)));
  buckets_.assign(static_cast<std::size_t>(nbx_) * nby_, {});
  for (int n = 0; n < nn; ++n) {
    const Vec2& p = position_[n];
    const int i0 = std::clamp(static_cast<int>(std::floor((p.x() - radius_[n] - grid_lo_.x()) / bucket_)), 0, nbx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((p.x() + radius_[n] - grid_lo_.x()) / bucket_)), 0, nbx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((p.y() - radius_[n] - grid_lo_.y()) / bucket_)), 0, nby_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((p.y() + radius_[n] - grid_lo_.y()) / bucket_)), 0, nby_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nbx_ + i].push_back(n);
  }
}

void MlsRecovery::candidates(const Vec2& x, double factor, std::vector<int>& out) const {
  out.clear();
  if (factor == 1.0) {
    const int i = std::clamp(static_cast<int>(std::floor((x.x() - grid_lo_.x()) / bucket_)), 0, nbx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((x.y() - grid_lo_.y()) / bucket_)), 0, nby_ - 1);
    for (int n : buckets_[static_cast<std::size_t>(j) * nbx_ + i]) {
      if ((position_[n] - x).norm() < radius_[n]) out.push_back(n);
    }
    return;
  }
  for (int n = 0; n < static_cast<int>(position_.size()); ++n) {
    if ((position_[n] - x).norm() < factor * radius_[n]) out.push_back(n);
  }
}

MlsShape MlsRecovery::shape_at(const Vec2& x, std::vector<int>& node_ids) const {
  double factor = 1.0;
  std::vector<Vec2> pos;
  std::vector<double> w;
  std::vector<Vec2> dw;
  for (int attempt = 0;; ++attempt) {
    candidates(x, factor, node_ids);
    pos.clear();
    w.clear();
    dw.clear();
    double length = 0.0;
    for (int n : node_ids) {
      const double dk = factor * radius_[n];
      const double s = diffraction_distance(x, position_[n], dk, crack_);
      pos.push_back(position_[n]);
      w.push_back(spline_weight(s));
      dw.push_back(spline_weight_derivative(s) *
                   diffraction_distance_gradient(x, position_[n], dk, crack_));
      length = std::max(length, dk);
    }
    try {
      return mls_shape(x, pos, w, dw, config_, length > 0.0 ? length : 1.0);
    } catch (const InsufficientCoverage&) {
      if (attempt >= config_.max_growth_attempts) throw;
      factor *= config_.growth;
    }
  }
}

Mat2 MlsRecovery::recovered_strain(const Vec2& x, const Eigen::VectorXd& u) const {
  std::vector<int> ids;
  const MlsShape s = shape_at(x, ids);
  Mat2 grad = Mat2::Zero();  // grad(r, c) = d u_r / d x_c
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Vec2 uk(u[2 * ids[k]], u[2 * ids[k] + 1]);
    grad += uk * s.dpsi.row(static_cast<Eigen::Index>(k));
  }
  return 0.5 * (grad + grad.transpose());
}

Mat2 element_strain(const MeshElement& element, const ShapeEvaluation& shape,
                    const Eigen::VectorXd& u) {
  Mat2 grad = Mat2::Zero();
  for (std::size_t k = 0; k < element.nodes.size(); ++k) {
    const int n = element.nodes[k];
    const Vec2 uk(u[2 * n], u[2 * n + 1]);
    grad += uk * shape.dN.row(static_cast<Eigen::Index>(k));
  }
  return 0.5 * (grad + grad.transpose());
}

double element_error(const QuadtreeMesh& mesh, int e, const StrainField& recovered,
                     const Eigen::VectorXd& u, int order) {
  const MeshElement& el = mesh.elements()[e];
  const std::vector<Vec2> verts = mesh.element_vertices(e);
  double sum = 0.0;
  for (const ShapeEvaluation& s : element_shapes(verts, el.kind, order)) {
    const Mat2 diff = element_strain(el, s, u) - recovered(s.x);
    sum += s.weight * diff.squaredNorm();
  }
  return std::sqrt(sum);
}

double element_error(const QuadtreeMesh& mesh, int e, const MlsRecovery& recovery,
                     const Eigen::VectorXd& u, int order) {
  return element_error(
      mesh, e, [&](const Vec2& x) { return recovery.recovered_strain(x, u); }, u, order);
}

double global_error(std::span<const double> element_errors) {
  double sum = 0.0;
  for (double e : element_errors) sum += e * e;
  return std::sqrt(sum);
}

ErrorMap compute_error_map(const QuadtreeMesh& mesh, const CrackGeometry& crack,
                           const MlsConfig& config, const Eigen::VectorXd& u, int threads) {
  const MlsRecovery recovery(mesh, crack, config);
  ErrorMap map;
  const int ne = mesh.num_elements();
  map.element.assign(ne, 0.0);
  auto work = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) map.element[e] = element_error(mesh, e, recovery, u);
  };
  threads = std::clamp(threads, 1, std::max(1, ne));
  if (threads == 1) {
    work(0, ne);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> pool;
      const int chunk = (ne + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const int b = t * chunk;
        const int e = std::min(ne, b + chunk);
        if (b >= e) continue;
        pool.emplace_back([&, t, b, e] {
          try {
            work(b, e);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  map.global = global_error(map.element);
  return map;
}

}  // namespace orthofrac
