#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "orthofrac/phasefield.hpp"
#include "test_util.hpp"

using namespace orthofrac;

TEST(StructuralTensor, ZeroPenaltyIsIdentity) {
  for (double a : {0.0, 0.4, 2.0}) EXPECT_LT((structural_tensor(a, 0.0) - Mat2::Identity()).norm(), 1e-15);
}

TEST(StructuralTensor, AxisAligned) {
  Mat2 expected;
  expected << 1, 0, 0, 21;
  EXPECT_LT((structural_tensor(0.0, 20.0) - expected).norm(), 1e-14);
}

TEST(StructuralTensor, FortyFiveDegrees) {
  Mat2 expected;
  expected << 11, -10, -10, 11;
  EXPECT_LT((structural_tensor(std::numbers::pi / 4, 20.0) - expected).norm(), 1e-12);
}

TEST(StructuralTensor, CleavageNormalAxisMakesFibreDirectionCheap) {
  PhaseFieldParams p;
  p.ell0 = 0.01;
  const double theta = 0.5;
  const Mat2 A = structural_tensor(p.structural_angle(theta), 20.0);
  const Vec2 fibre(std::cos(theta), std::sin(theta));
  const Vec2 across(-std::sin(theta), std::cos(theta));
  EXPECT_NEAR(fibre.dot(A * fibre), 21.0, 1e-12);
  EXPECT_NEAR(across.dot(A * across), 1.0, 1e-12);
  p.axis = StructuralAxis::fibre;
  EXPECT_DOUBLE_EQ(p.structural_angle(theta), theta);
}

TEST(Degradation, Values) {
  EXPECT_DOUBLE_EQ(degradation(0.0, 1e-6), 1.0 + 1e-6);
  EXPECT_DOUBLE_EQ(degradation(1.0, 1e-6), 1e-6);
  EXPECT_NEAR(degradation(0.5, 1e-6), 0.250001, 1e-15);
}

TEST(SpectralSplit, ZeroStrain) {
  const EnergySplit s = spectral_split(Mat2::Zero(), 3.0, 2.0);
  EXPECT_EQ(s.plus, 0.0);
  EXPECT_EQ(s.minus, 0.0);
}

TEST(SpectralSplit, Uniaxial) {
  const double e = 1e-3, lam = 40.0, mu = 25.0;
  Mat2 eps;
  eps << e, 0, 0, 0;
  const EnergySplit s = spectral_split(eps, lam, mu);
  EXPECT_NEAR(s.plus, 0.5 * lam * e * e + mu * e * e, 1e-18);
  EXPECT_EQ(s.minus, 0.0);
}

TEST(SpectralSplit, RotatedPureShear) {
  const double e = 2e-3, lam = 40.0, mu = 25.0, a = 0.3;
  Mat2 R;
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  const Mat2 eps = R * Eigen::Vector2d(e, -e).asDiagonal() * R.transpose();
  const EnergySplit s = spectral_split(eps, lam, mu);
  EXPECT_NEAR(s.plus, mu * e * e, 1e-15);
  EXPECT_NEAR(s.minus, mu * e * e, 1e-15);
}

TEST(SpectralSplit, MatchesEigenSolverOracle) {
  for (int i = 0; i < 200; ++i) {
    Mat2 eps;
    eps(0, 0) = testutil::uniform(-1e-2, 1e-2);
    eps(1, 1) = testutil::uniform(-1e-2, 1e-2);
    eps(0, 1) = eps(1, 0) = testutil::uniform(-1e-2, 1e-2);
    Eigen::SelfAdjointEigenSolver<Mat2> es(eps);
    const auto v = es.eigenvalues();
    const double lam = 50.0, mu = 30.0;
    const double tr = v.sum();
    const double plus = 0.5 * lam * std::pow(std::max(tr, 0.0), 2) +
                        mu * (std::pow(std::max(v[0], 0.0), 2) + std::pow(std::max(v[1], 0.0), 2));
    const double minus = 0.5 * lam * std::pow(std::min(tr, 0.0), 2) +
                         mu * (std::pow(std::min(v[0], 0.0), 2) + std::pow(std::min(v[1], 0.0), 2));
    const EnergySplit s = spectral_split(eps, lam, mu);
    EXPECT_NEAR(s.plus, plus, 1e-12 * (plus + minus) + 1e-300);
    EXPECT_NEAR(s.minus, minus, 1e-12 * (plus + minus) + 1e-300);
  }
}

TEST(SpectralSplit, EnergiesSumToTotalOverRandomStrains) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(-5e-3, 5e-3);
  for (int i = 0; i < 1000; ++i) {
    Mat2 eps;
    eps(0, 0) = u(g);
    eps(1, 1) = u(g);
    eps(0, 1) = eps(1, 0) = u(g);
    const double lam = 10000.0 * (1.0 + std::abs(u(g)) * 100), mu = 40000.0;
    const EnergySplit s = spectral_split(eps, lam, mu);
    const double psi = strain_energy(eps, lam, mu);
    EXPECT_GE(s.plus, 0.0);
    EXPECT_GE(s.minus, 0.0);
    EXPECT_LE(std::abs(s.plus + s.minus - psi), 1e-10 * psi);
  }
}

TEST(PrincipalStrains, DirectionsAreOrthonormalEigenvectors) {
  Mat2 eps;
  eps << 3e-3, 1e-3, 1e-3, -2e-3;
  Eigen::Vector2d v;
  Mat2 d;
  principal_strains(eps, v, d);
  EXPECT_LE(v[0], v[1]);
  for (int k = 0; k < 2; ++k) EXPECT_LT((eps * d.col(k) - v[k] * d.col(k)).norm(), 1e-15);
  EXPECT_LT((d.transpose() * d - Mat2::Identity()).norm(), 1e-14);
}

TEST(History, MaxSemantics) {
  EXPECT_EQ(update_history(5.0, 3.0), 5.0);
  EXPECT_EQ(update_history(0.0, 7.0), 7.0);
  double H = 0.0;
  std::vector<double> seen;
  for (double p : {2.0, 9.0, 4.0}) seen.push_back(H = update_history(H, p));
  EXPECT_EQ(seen, (std::vector<double>{2.0, 9.0, 9.0}));
}

TEST(HybridConstraint, Cases) {
  EXPECT_EQ(hybrid_constraint(1.0, 5.0, 0.8), 0.0);
  EXPECT_EQ(hybrid_constraint(5.0, 1.0, 0.8), 0.8);
  EXPECT_EQ(hybrid_constraint(2.0, 2.0, 0.3), 0.3);
}

TEST(Params, Validation) {
  PhaseFieldParams p;
  EXPECT_THROW(p.validate(), ConfigError);
  p.ell0 = 0.01;
  EXPECT_NO_THROW(p.validate());
  p.k_p = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}
