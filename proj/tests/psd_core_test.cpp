#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wishart_cone/errors.hpp"
#include "wishart_cone/json_io.hpp"
#include "wishart_cone/psd_core.hpp"

namespace wishart_cone {
namespace {

using test_util::error_code_of;
using test_util::mat;

double reconstruction_error(const ScaleFactorization& f) {
  const Eigen::MatrixXd rebuilt = f.u_orth.transpose() * f.eigs.asDiagonal() * f.u_orth;
  return (rebuilt - f.sigma.dense()).norm();
}

TEST(SymMatrix, SymmetrizesSmallAsymmetry) {
  const SymMatrix a(mat({{1.0, 2.0 + 1e-13}, {2.0, 3.0}}));
  EXPECT_EQ(a(0, 1), a(1, 0));
  EXPECT_DOUBLE_EQ(a(0, 1), 2.0 + 0.5e-13);
}

TEST(SymMatrix, RejectsLargeAsymmetry) {
  EXPECT_EQ(error_code_of([] { SymMatrix(mat({{1.0, 2.0}, {2.1, 3.0}})); }), ErrorCode::NotSymmetric);
}

TEST(SymMatrix, RejectsNonSquareAndEmpty) {
  EXPECT_EQ(error_code_of([] { SymMatrix(Eigen::MatrixXd(2, 3)); }), ErrorCode::DimensionError);
  EXPECT_EQ(error_code_of([] { SymMatrix(Eigen::MatrixXd(0, 0)); }), ErrorCode::DimensionError);
}

TEST(SymMatrix, RejectsNonFinite) {
  EXPECT_EQ(error_code_of([] { SymMatrix(mat({{NAN}})); }), ErrorCode::NonFinite);
}

TEST(PsdCheck, FlagsNegativeEigenvalue) {
  const PsdCheck c = psd_check(SymMatrix(mat({{1, 2}, {2, 1}})));
  EXPECT_FALSE(c.is_psd);
  EXPECT_NEAR(c.min_eigenvalue, -1.0, 1e-14);
  EXPECT_TRUE(psd_check(SymMatrix::identity(3)).is_psd);
  EXPECT_TRUE(psd_check(SymMatrix::zero(2)).is_psd);
}

TEST(SpectralFactorize, Identity) {
  const auto f = spectral_factorize(SymMatrix::identity(3));
  EXPECT_EQ(f.rank, 3);
  EXPECT_TRUE(f.eigs.isApprox(Eigen::VectorXd::Ones(3)));
  EXPECT_LE(reconstruction_error(f), 1e-12);
}

TEST(SpectralFactorize, DiagonalRankOne) {
  const auto f = spectral_factorize(SymMatrix(mat({{5, 0}, {0, 0}})));
  EXPECT_EQ(f.rank, 1);
  EXPECT_DOUBLE_EQ(f.eigs(0), 5.0);
  EXPECT_EQ(f.eigs(1), 0.0);
}

TEST(SpectralFactorize, OuterProductOfThreeFourFive) {
  // Characteristic polynomial of q q^T with |q| = 1 is lambda^2 - lambda.
  const auto f = spectral_factorize(SymMatrix(mat({{9.0 / 25, 12.0 / 25}, {12.0 / 25, 16.0 / 25}})));
  EXPECT_EQ(f.rank, 1);
  EXPECT_NEAR(f.eigs(0), 1.0, 1e-15);
  EXPECT_EQ(f.eigs(1), 0.0);
  EXPECT_NEAR(std::abs(f.u_orth(0, 0)), 0.6, 1e-15);
  EXPECT_NEAR(std::abs(f.u_orth(0, 1)), 0.8, 1e-15);
}

TEST(SpectralFactorize, ZeroMatrixHasRankZero) {
  const auto f = spectral_factorize(SymMatrix::zero(3));
  EXPECT_EQ(f.rank, 0);
  EXPECT_TRUE(f.eigs.isZero(0.0));
}

TEST(SpectralFactorize, Errors) {
  EXPECT_EQ(error_code_of([] { spectral_factorize(SymMatrix(mat({{1, 2}, {2, 1}}))); }), ErrorCode::NotPsd);
  EXPECT_EQ(error_code_of([] { spectral_factorize(SymMatrix::identity(2), 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { spectral_factorize(SymMatrix::identity(2), 1.0); }), ErrorCode::InvalidArgument);
}

TEST(SpectralFactorize, TruncatesBelowRelativeTolerance) {
  const auto f = spectral_factorize(SymMatrix(mat({{1e6, 0}, {0, 1e-6}})));
  EXPECT_EQ(f.rank, 1);
  const auto g = spectral_factorize(SymMatrix(mat({{1e-6, 0}, {0, 1e-12}})));
  EXPECT_EQ(g.rank, 2);  // scale-invariant: ratio 1e-6 is above the cutoff
}

TEST(SpectralFactorize, PropertyRandomSpectra) {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    const int r = 1 + (trial / 6) % d;
    Eigen::VectorXd spectrum = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < r; ++i) spectrum(i) = unif(gen);
    const Eigen::MatrixXd q = oracle::random_rotation(d, gen);
    const SymMatrix sigma = SymMatrix::symmetrize(q * spectrum.asDiagonal() * q.transpose());
    const auto f = spectral_factorize(sigma);
    ASSERT_EQ(f.rank, r);
    EXPECT_LE(reconstruction_error(f), 1e-10 * sigma.dense().norm());
    EXPECT_LE((f.u_orth.transpose() * f.u_orth - Eigen::MatrixXd::Identity(d, d)).norm(), 1e-12);
    const Eigen::MatrixXd diag = f.u_orth * sigma.dense() * f.u_orth.transpose();
    EXPECT_LE((diag - Eigen::MatrixXd(f.eigs.asDiagonal())).norm(), 1e-10 * sigma.dense().norm());
    for (int i = 1; i < d; ++i) EXPECT_GE(f.eigs(i - 1), f.eigs(i));
    for (int i = 0; i < f.rank; ++i) EXPECT_GT(f.eigs(i), f.rank_tolerance * f.eigs(0));
  }
}

TEST(SpectralFactorize, RankOfUnitOuterProductIsOne) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + trial % 7;
    Eigen::VectorXd q(d);
    for (int i = 0; i < d; ++i) q(i) = normal(gen);
    q.normalize();
    EXPECT_EQ(spectral_factorize(SymMatrix::symmetrize(q * q.transpose())).rank, 1);
  }
}

TEST(Project, LeadingBlock) {
  EXPECT_EQ(project(SymMatrix::identity(3), 2), SymMatrix::identity(2));
  const SymMatrix a(mat({{1, 2, 3}, {2, 4, 5}, {3, 5, 6}}));
  EXPECT_EQ(project(a, 2), SymMatrix(mat({{1, 2}, {2, 4}})));
  EXPECT_EQ(project(a, 3), a);
  EXPECT_EQ(error_code_of([&] { project(a, 0); }), ErrorCode::DimensionError);
  EXPECT_EQ(error_code_of([&] { project(a, 4); }), ErrorCode::DimensionError);
}

TEST(Embed, ZeroPadding) {
  EXPECT_EQ(embed(SymMatrix(mat({{2}})), 3), SymMatrix(mat({{2, 0, 0}, {0, 0, 0}, {0, 0, 0}})));
  EXPECT_EQ(embed(SymMatrix::identity(2), 2), SymMatrix::identity(2));
  EXPECT_EQ(error_code_of([] { embed(SymMatrix::identity(3), 2); }), ErrorCode::DimensionError);
}

TEST(ProjectEmbed, SectionAndTraceDuality) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 6;
    const int r = 1 + (trial / 6) % d;
    Eigen::MatrixXd a(r, r), s(d, d);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) a(i, j) = normal(gen);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s(i, j) = normal(gen);
    const SymMatrix as = SymMatrix::symmetrize(a);
    const SymMatrix ss = SymMatrix::symmetrize(s);
    EXPECT_EQ(project(embed(as, d), r), as);
    const double lhs = trace_product(embed(as, d), ss);
    const double rhs = trace_product(as, project(ss, r));
    EXPECT_NEAR(lhs, rhs, 1e-14 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Conjugate, IdentityAndQuarterTurn) {
  const SymMatrix xi(mat({{1, 0}, {0, 0}}));
  EXPECT_EQ(conjugate(xi, Eigen::MatrixXd::Identity(2, 2)), xi);
  const SymMatrix turned = conjugate(xi, oracle::rotation_2d(M_PI / 2));
  EXPECT_NEAR(turned(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(turned(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(turned(0, 1), 0.0, 1e-15);
}

TEST(Conjugate, RejectsNonOrthogonal) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(2, 2);
  u(0, 1) = 1e-6;
  EXPECT_EQ(error_code_of([&] { conjugate(SymMatrix::identity(2), u); }), ErrorCode::NotOrthogonal);
  EXPECT_EQ(error_code_of([&] { conjugate(SymMatrix::identity(3), u); }), ErrorCode::DimensionError);
}

TEST(Conjugate, InverseAndEigenvaluesPreserved) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 6;
    Eigen::MatrixXd x(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = normal(gen);
    const SymMatrix xi = SymMatrix::symmetrize(x);
    const Eigen::MatrixXd u = oracle::random_rotation(d, gen);
    const SymMatrix back = conjugate(conjugate(xi, u), u.transpose());
    EXPECT_LE((back.dense() - xi.dense()).norm(), 1e-12 * std::max(1.0, xi.dense().norm()));
    const Eigen::VectorXd e1 = eigenvalues(xi);
    const Eigen::VectorXd e2 = eigenvalues(conjugate(xi, u));
    EXPECT_LE((e1 - e2).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, e1.cwiseAbs().maxCoeff()));
  }
}

TEST(MatrixJson, RoundTripAndDiagnostics) {
  const SymMatrix a(mat({{1.5, -0.25}, {-0.25, 3.0}}));
  EXPECT_EQ(matrix_from_json(matrix_to_json(a)), a);
  auto code = [](const char* text) {
    return error_code_of([&] { matrix_from_json(nlohmann::json::parse(text)); });
  };
  EXPECT_EQ(code("[[1,2],[3]]"), ErrorCode::ParseError);
  EXPECT_EQ(code("[[1,2],[2.5,1]]"), ErrorCode::ParseError);
  EXPECT_EQ(code("[[1,\"x\"],[1,1]]"), ErrorCode::ParseError);
  EXPECT_EQ(code("[]"), ErrorCode::ParseError);
  try {
    matrix_from_json(nlohmann::json::parse("[[1,2,3],[2,1]]"));
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
  }
}

}  // namespace
}  // namespace wishart_cone
