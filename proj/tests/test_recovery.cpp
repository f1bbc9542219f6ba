#include <cmath>

#include <gtest/gtest.h>

#include "orthofrac/recovery.hpp"
#include "test_util.hpp"

using namespace orthofrac;

namespace {

Eigen::VectorXd sample(const QuadtreeMesh& m, auto field) {
  Eigen::VectorXd u(2 * m.num_nodes());
  for (int n = 0; n < m.num_nodes(); ++n) {
    const Vec2 v = field(m.nodes()[n]);
    u[2 * n] = v.x();
    u[2 * n + 1] = v.y();
  }
  return u;
}

CrackGeometry horizontal_crack() { return CrackGeometry{{Vec2(-5, 0), Vec2(1, 0)}}; }

}  // namespace

TEST(Spline, EndpointsMidpointAndSmoothness) {
  EXPECT_DOUBLE_EQ(spline_weight(0.0), 1.0);
  EXPECT_DOUBLE_EQ(spline_weight(1.0), 0.0);
  EXPECT_DOUBLE_EQ(spline_weight(0.5), 0.3125);
  EXPECT_DOUBLE_EQ(spline_weight(1.5), 0.0);
  EXPECT_NEAR(spline_weight_derivative(1.0), 0.0, 1e-15);
  EXPECT_NEAR(spline_weight_derivative(0.0), 0.0, 1e-15);
  // C1 at s = 1: one-sided difference quotients agree with the zero derivative
  const double h = 1e-6;
  EXPECT_NEAR((spline_weight(1.0) - spline_weight(1.0 - h)) / h, 0.0, 1e-5);
  EXPECT_NEAR((spline_weight(1.0 + h) - spline_weight(1.0)) / h, 0.0, 1e-12);
  for (double s : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(spline_weight_derivative(s), (spline_weight(s + h) - spline_weight(s - h)) / (2 * h), 1e-8);
  }
}

TEST(Diffraction, EuclideanWhenNotCut) {
  EXPECT_DOUBLE_EQ(diffraction_distance(Vec2(0, 1), Vec2(0, 0), 2.0, CrackGeometry{}), 0.5);
  EXPECT_DOUBLE_EQ(diffraction_distance(Vec2(0, 1), Vec2(0, 0), 2.0, CrackGeometry{{Vec2(5, 5), Vec2(6, 5)}}), 0.5);
}

TEST(Diffraction, RoutesThroughTip) {
  const double s = diffraction_distance(Vec2(0, -1), Vec2(0, 1), 4.0, horizontal_crack());
  EXPECT_NEAR(s, (std::sqrt(2.0) + std::sqrt(2.0)) / 4.0, 1e-15);
  EXPECT_NEAR(s, 0.7071067811865476, 1e-15);
}

TEST(Diffraction, GrazingTheTipIsNotACut) {
  // segment passes exactly through the tip
  const double s = diffraction_distance(Vec2(2, -1), Vec2(0, 1), 4.0, horizontal_crack());
  EXPECT_NEAR(s, std::sqrt(8.0) / 4.0, 1e-15);
  // both points on the same side
  EXPECT_NEAR(diffraction_distance(Vec2(0, 0.5), Vec2(0, 1), 4.0, horizontal_crack()), 0.125, 1e-15);
}

TEST(Diffraction, CrackReducesWeight) {
  const Vec2 xk(0.2, 0.3), x(0.1, -0.4);
  const double dk = 3.0;
  const double plain = spline_weight(diffraction_distance(x, xk, dk, CrackGeometry{}));
  const double cut = spline_weight(diffraction_distance(x, xk, dk, horizontal_crack()));
  EXPECT_LT(cut, plain);
}

TEST(Diffraction, GradientMatchesFiniteDifference) {
  const Vec2 xk(0.2, 0.3);
  for (const Vec2& x : {Vec2(0.1, -0.4), Vec2(0.4, 0.6)}) {
    const Vec2 g = diffraction_distance_gradient(x, xk, 2.0, horizontal_crack());
    const double h = 1e-7;
    for (int d = 0; d < 2; ++d) {
      Vec2 e = Vec2::Zero();
      e[d] = h;
      const double fd = (diffraction_distance(x + e, xk, 2.0, horizontal_crack()) -
                         diffraction_distance(x - e, xk, 2.0, horizontal_crack())) / (2 * h);
      EXPECT_NEAR(g[d], fd, 1e-7);
    }
  }
}

TEST(MlsShape, ReproductionAndPartitionOfUnity) {
  MlsConfig cfg;
  std::vector<Vec2> nodes;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) nodes.emplace_back(0.25 * i, 0.25 * j);
  for (int t = 0; t < 50; ++t) {
    const Vec2 x(testutil::uniform(0.1, 0.9), testutil::uniform(0.1, 0.9));
    std::vector<double> w;
    std::vector<Vec2> dw;
    for (const auto& p : nodes) {
      const double s = (x - p).norm() / 0.6;
      w.push_back(spline_weight(s));
      dw.push_back(s > 0 ? Vec2(spline_weight_derivative(s) * (x - p) / ((x - p).norm() * 0.6)) : Vec2::Zero());
    }
    const MlsShape m = mls_shape(x, nodes, w, dw, cfg, 0.6);
    double f = 0.0;
    Vec2 sum_x = Vec2::Zero();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      f += m.psi[k] * (0.5 - nodes[k].x() + 3.0 * nodes[k].y());
      sum_x += m.psi[k] * nodes[k];
    }
    EXPECT_NEAR(m.psi.sum(), 1.0, 1e-12);
    EXPECT_NEAR(f, 0.5 - x.x() + 3.0 * x.y(), 1e-10);
    EXPECT_LT((sum_x - x).norm(), 1e-10);
  }
}

TEST(MlsShape, TooFewNodesThrows) {
  MlsConfig cfg;
  const std::vector<Vec2> nodes = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const std::vector<double> w = {1, 1, 1};
  const std::vector<Vec2> dw(3, Vec2::Zero());
  EXPECT_THROW(mls_shape(Vec2(0.2, 0.2), nodes, w, dw, cfg), InsufficientCoverage);
  // four collinear nodes: singular moment matrix
  const std::vector<Vec2> line = {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0)};
  const std::vector<double> w4 = {1, 1, 1, 1};
  const std::vector<Vec2> dw4(4, Vec2::Zero());
  EXPECT_THROW(mls_shape(Vec2(0.5, 0.0), line, w4, dw4, cfg), InsufficientCoverage);
}

TEST(MlsRecovery, DerivativesMatchFiniteDifferences) {
  auto m = testutil::hanging_mesh(2);
  const MlsRecovery rec(m, CrackGeometry{}, MlsConfig{});
  for (int t = 0; t < 30; ++t) {
    const Vec2 x(testutil::uniform(0.05, 0.95), testutil::uniform(0.05, 0.95));
    std::vector<int> ids, ids_p, ids_m;
    const MlsShape s = rec.shape_at(x, ids);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
      Vec2 e = Vec2::Zero();
      e[d] = h;
      const MlsShape sp = rec.shape_at(x + e, ids_p);
      const MlsShape sm = rec.shape_at(x - e, ids_m);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        auto value = [&](const MlsShape& sh, const std::vector<int>& id) {
          for (std::size_t j = 0; j < id.size(); ++j)
            if (id[j] == ids[k]) return sh.psi[j];
          return 0.0;
        };
        const double fd = (value(sp, ids_p) - value(sm, ids_m)) / (2 * h);
        EXPECT_NEAR(s.dpsi(k, d), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(MlsRecovery, LinearReproductionOnHangingMesh) {
  auto m = testutil::graded_mesh(Vec2(0.3, 0.6), 2, 3);
  const MlsRecovery rec(m, CrackGeometry{}, MlsConfig{});
  for (int t = 0; t < 100; ++t) {
    const Vec2 x(testutil::uniform(0, 1), testutil::uniform(0, 1));
    std::vector<int> ids;
    const MlsShape s = rec.shape_at(x, ids);
    double one = 0.0;
    Vec2 pos = Vec2::Zero();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      one += s.psi[k];
      pos += s.psi[k] * m.nodes()[ids[k]];
    }
    EXPECT_LT(std::abs(one - 1.0), 1e-9);
    EXPECT_LT((pos - x).norm(), 1e-9);
  }
}

TEST(MlsRecovery, LinearFieldGivesExactStrainAndZeroError) {
  auto m = testutil::graded_mesh(Vec2(0.7, 0.2), 2, 3);
  const Eigen::VectorXd u = sample(m, [](const Vec2& x) {
    return Vec2(1e-3 * x.x() + 2e-3 * x.y() + 0.1, -5e-4 * x.x() + 3e-3 * x.y());
  });
  Mat2 exact;
  exact << 1e-3, 0.5 * (2e-3 - 5e-4), 0.5 * (2e-3 - 5e-4), 3e-3;
  const MlsRecovery rec(m, CrackGeometry{}, MlsConfig{});
  for (int t = 0; t < 20; ++t) {
    const Vec2 x(testutil::uniform(0, 1), testutil::uniform(0, 1));
    EXPECT_LT((rec.recovered_strain(x, u) - exact).norm(), 1e-9 * exact.norm());
  }
  EXPECT_LT((rec.recovered_strain(Vec2(0.5, 0.5), Eigen::VectorXd::Zero(u.size()))).norm(), 1e-300);
  const ErrorMap errors = compute_error_map(m, CrackGeometry{}, MlsConfig{}, u);
  EXPECT_LT(errors.global, 1e-10 * exact.norm());
}

TEST(MlsRecovery, QuadraticFieldRecoveredMoreAccuratelyThanFiniteElementStrain) {
  auto m = testutil::graded_mesh(Vec2(0.5, 0.5), 3, 0);
  auto field = [](const Vec2& x) { return Vec2(x.x() * x.x() + 0.5 * x.y() * x.y(), x.x() * x.y()); };
  auto exact = [](const Vec2& x) {
    Mat2 e;
    e << 2 * x.x(), 0.5 * (x.y() + x.y()), 0.5 * (x.y() + x.y()), x.x();
    return e;
  };
  const Eigen::VectorXd u = sample(m, field);
  const MlsRecovery rec(m, CrackGeometry{}, MlsConfig{});
  double fe = 0.0, mls = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    // keep away from the boundary where MLS loses symmetry
    const Vec2 c = polygon_centroid(m.element_vertices(e));
    if (c.x() < 0.2 || c.x() > 0.8 || c.y() < 0.2 || c.y() > 0.8) continue;
    for (const auto& s : element_shapes(m.element_vertices(e), m.elements()[e].kind, 3)) {
      fe += s.weight * (element_strain(m.elements()[e], s, u) - exact(s.x)).squaredNorm();
      mls += s.weight * (rec.recovered_strain(s.x, u) - exact(s.x)).squaredNorm();
    }
  }
  EXPECT_LT(mls, fe);
}

TEST(ElementError, ConstantMismatchAndIdentity) {
  auto m = testutil::hanging_mesh();
  Eigen::VectorXd u(2 * m.num_nodes());
  for (int i = 0; i < u.size(); ++i) u[i] = testutil::uniform(-1e-3, 1e-3);
  Mat2 delta;
  delta << 3e-4, 0, 0, 4e-4;  // Frobenius norm 5e-4
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& el = m.elements()[e];
    // recovered field equal to the element's own strain at its quadrature points
    const auto shapes = element_shapes(m.element_vertices(e), el.kind, 2);
    auto same = [&](const Vec2& x) {
      for (const auto& s : shapes) {
        if ((s.x - x).norm() < 1e-14) return element_strain(el, s, u);
      }
      ADD_FAILURE() << "point is not a quadrature point";
      return Mat2(Mat2::Zero());
    };
    EXPECT_LT(element_error(m, e, same, u), 1e-12);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u.size());
    const double area = signed_area(m.element_vertices(e));
    EXPECT_NEAR(element_error(m, e, [&](const Vec2&) { return delta; }, zero), 5e-4 * std::sqrt(area),
                1e-15);
  }
}

TEST(ElementError, DefaultRuleMatchesReferenceQuadratureOnQuads) {
  auto m = testutil::graded_mesh(Vec2(0.5, 0.5), 2, 0);
  Eigen::VectorXd u(2 * m.num_nodes());
  for (int i = 0; i < u.size(); ++i) u[i] = testutil::uniform(-1e-3, 1e-3);
  auto linear = [](const Vec2& x) {
    Mat2 e;
    e << 1e-3 * x.x(), 2e-4 * x.y(), 2e-4 * x.y(), -1e-3 + 5e-4 * x.x();
    return e;
  };
  for (int e = 0; e < m.num_elements(); ++e) {
    const double a = element_error(m, e, linear, u, 2);
    const double ref = element_error(m, e, linear, u, 4);
    EXPECT_NEAR(a, ref, 1e-6 * ref);
  }
}

TEST(GlobalError, Combination) {
  EXPECT_EQ(global_error(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(global_error(std::vector<double>{0, 2.5, 0}), 2.5);
  EXPECT_DOUBLE_EQ(global_error(std::vector<double>{3, 4}), 5.0);
}

TEST(ErrorMap, GlobalBoundsAndThreadedMatchesSerial) {
  const std::vector<Vec2> notch = {Vec2(0, 0.5), Vec2(0.5, 0.5)};
  auto m = testutil::graded_mesh(Vec2(0.5, 0.5), 3, 2, notch);
  Eigen::VectorXd u(2 * m.num_nodes());
  for (int n = 0; n < m.num_nodes(); ++n) {
    const Vec2 p = m.nodes()[n];
    u[2 * n] = 1e-3 * p.x() * p.y();
    u[2 * n + 1] = m.node_side(n) * 1e-3 + 2e-3 * p.y() * p.y();
  }
  const CrackGeometry crack{notch};
  const ErrorMap a = compute_error_map(m, crack, MlsConfig{}, u, 1);
  const ErrorMap b = compute_error_map(m, crack, MlsConfig{}, u, 3);
  ASSERT_EQ(a.element.size(), b.element.size());
  for (std::size_t i = 0; i < a.element.size(); ++i) EXPECT_EQ(a.element[i], b.element[i]);
  double mx = 0.0, sum = 0.0;
  for (double e : a.element) {
    mx = std::max(mx, e * e);
    sum += e * e;
  }
  EXPECT_GE(a.global * a.global, mx * (1 - 1e-10));
  EXPECT_LE(a.global * a.global, sum * (1 + 1e-10));
}

TEST(ErrorMap, CrackOpeningIsNotSmearedAcrossTheSlit) {
  // rigid opening of the two faces: piecewise constant field, zero strain everywhere
  const std::vector<Vec2> notch = {Vec2(0, 0.5), Vec2(0.5, 0.5)};
  auto m = testutil::graded_mesh(Vec2(0.25, 0.5), 3, 1, notch);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m.num_nodes());
  for (int n = 0; n < m.num_nodes(); ++n) {
    if (m.nodes()[n].y() > 0.5 || m.node_side(n) == 1) u[2 * n + 1] = 1e-3;
  }
  const CrackGeometry crack{notch};
  const ErrorMap with = compute_error_map(m, crack, MlsConfig{}, u);
  const ErrorMap without = compute_error_map(m, CrackGeometry{}, MlsConfig{}, u);
  EXPECT_LT(with.global, without.global);
}
