#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"

namespace optcons {
namespace {

using namespace optcons::testing;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

TEST(LtiSystem, ValidatesShapesAndRank) {
  EXPECT_EQ(code_of([] { LtiSystem(Matrix::Zero(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2)); }),
            ErrorCode::NonSquare);
  EXPECT_EQ(code_of([] { LtiSystem(Matrix::Zero(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2)); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { LtiSystem(Matrix::Zero(2, 2), Matrix::Ones(2, 2), Matrix::Ones(1, 2)); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { LtiSystem(Matrix::Zero(2, 2), Matrix::Ones(2, 1), Matrix::Ones(2, 2)); }),
            ErrorCode::InvalidArgument);
}

TEST(OutputGramian, SingleIntegratorIsInterval) {
  const auto W = output_gramian(single_integrator(), 0.25, 2.0);
  EXPECT_NEAR(W.value(0, 0), 1.75, 1e-14);
  EXPECT_DOUBLE_EQ(W.t, 0.25);
  EXPECT_DOUBLE_EQ(W.T, 2.0);
}

TEST(OutputGramian, DoubleIntegratorFullOutput) {
  Matrix expected(2, 2);
  expected << 1.0 / 3, 0.5, 0.5, 1.0;
  EXPECT_LE((output_gramian(double_integrator_full_output(), 0.0, 1.0).value - expected).norm(),
            1e-14);
}

TEST(OutputGramian, StableScalar) {
  const double W = output_gramian(scalar(-1.0), 0.0, 1.0).value(0, 0);
  EXPECT_NEAR(W, (1.0 - std::exp(-2.0)) / 2.0, 1e-14);
  EXPECT_NEAR(W, 0.4323324, 1e-7);
}

TEST(OutputGramian, RejectsDegenerateInterval) {
  EXPECT_EQ(code_of([] { output_gramian(single_integrator(), 1.0, 1.0); }),
            ErrorCode::DegenerateInterval);
  EXPECT_EQ(code_of([] { related_gramian(single_integrator(), 2.0, 1.0); }),
            ErrorCode::DegenerateInterval);
}

TEST(OutputGramian, AgreesWithBlockExponentialRoute) {
  std::mt19937 rng(19);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = dim(rng);
    const int m = 1 + trial % n;
    const int p = 1 + (trial / 2) % n;
    const LtiSystem sys(random_matrix(rng, n, n, 1.0), random_matrix(rng, n, m),
                        random_matrix(rng, p, n));
    const double h = 0.5 + 0.05 * trial;
    const Matrix W = output_gramian(sys, 1.0, 1.0 + h).value;
    const Matrix W_ref = van_loan_output_gramian(sys, h);
    EXPECT_LE((W - W_ref).norm(), 1e-10 * (1.0 + W_ref.norm())) << trial;
    const Matrix G = related_gramian(sys, 1.0, 1.0 + h).value;
    const Matrix G_ref = van_loan_related_gramian(sys, h);
    EXPECT_LE((G - G_ref).norm(), 1e-10 * (1.0 + G_ref.norm())) << trial;
  }
}

TEST(OutputGramian, MonotoneInInterval) {
  const LtiSystem sys = three_state();
  const Matrix W1 = output_gramian(sys, 0.0, 2.0).value;
  const Matrix W2 = output_gramian(sys, 0.5, 2.0).value;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(W1 - W2);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
}

TEST(RelatedGramian, Examples) {
  EXPECT_NEAR(related_gramian(single_integrator(), 0.0, 3.0).value(0, 0), 3.0, 1e-14);
  EXPECT_NEAR(related_gramian(scalar(-1.0), 0.0, 1.0).value(0, 0),
              (std::exp(2.0) - 1.0) / 2.0, 1e-13);
  const auto di = double_integrator_full_output();
  Matrix B(2, 1);
  B << 0, 1;
  const LtiSystem zeroA(Matrix::Zero(2, 2), B, Matrix::Identity(2, 2));
  EXPECT_LE((related_gramian(zeroA, 0.0, 1.5).value - output_gramian(zeroA, 0.0, 1.5).value).norm(),
            1e-14);
}

TEST(OutputControllability, Examples) {
  EXPECT_TRUE(is_output_controllable(single_integrator(), 1.0));
  EXPECT_TRUE(is_output_controllable(double_integrator_full_output(), 1.0));
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 1, 0, 0, 2;
  B << 0, 1;
  C << 1, 0;
  EXPECT_FALSE(is_output_controllable(LtiSystem(A, B, C), 1.0));
}

TEST(KernelInvariance, Examples) {
  EXPECT_TRUE(is_kernel_A_invariant(double_integrator_full_output()));
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 1, 0, 2, 3;
  B << 1, 0;
  C << 1, 0;
  EXPECT_TRUE(is_kernel_A_invariant(LtiSystem(A, B, C)));
  EXPECT_FALSE(is_kernel_A_invariant(double_integrator()));
  EXPECT_TRUE(is_kernel_A_invariant(three_state()));
}

TEST(ProjectionIdentity, HandExample) {
  Matrix C(1, 2), P(2, 2);
  C << 1, 0;
  P << 2, 0, 1, 3;
  EXPECT_LE(projection_identity_residual(C, P, Matrix::Identity(2, 2)), 1e-14);
}

TEST(ProjectionIdentity, IdentityPExactlyZero) {
  std::mt19937 rng(1);
  const Matrix C = random_matrix(rng, 2, 4);
  EXPECT_EQ(projection_identity_residual(C, Matrix::Identity(4, 4), random_spd(rng, 4)), 0.0);
}

TEST(ProjectionIdentity, RandomKernelPreservingBattery) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> dim(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    const int p = std::uniform_int_distribution<int>(1, n - 1)(rng);
    // Orthonormal basis adapted to ker C: the last n - p columns of T span ker C.
    const Matrix T = Eigen::HouseholderQR<Matrix>(random_matrix(rng, n, n)).householderQ();
    Matrix block = random_matrix(rng, n, n);
    block.topRightCorner(p, n - p).setZero();
    block.diagonal().array() += 3.0;
    const Matrix P = T * block * T.transpose();
    const Matrix C = random_matrix(rng, p, p) * Matrix::Identity(p, n) * T.transpose();
    const Matrix W = random_spd(rng, n);
    EXPECT_LE(projection_identity_residual(C, P, W), 1e-10) << trial;
  }
}

TEST(ProjectionIdentity, RejectsNonInvariantKernel) {
  Matrix C(1, 2), P(2, 2);
  C << 1, 0;
  P << 1, 1, 0, 1;
  EXPECT_EQ(code_of([&] { projection_identity_residual(C, P, Matrix::Identity(2, 2)); }),
            ErrorCode::KernelNotInvariant);
}

TEST(ProjectionIdentity, RejectsSingularInner) {
  Matrix C(1, 2), P(2, 2), W = Matrix::Zero(2, 2);
  C << 1, 0;
  P << 2, 0, 1, 3;
  EXPECT_EQ(code_of([&] { projection_identity_residual(C, P, W); }),
            ErrorCode::SingularInnerMatrix);
}

TEST(GramianRiccatiMatrix, OutputGainIdentityUnderInvariance) {
  for (const LtiSystem& sys : {three_state(), invariant_two_state()}) {
    for (double t : {0.0, 0.4, 0.9}) {
      const Matrix P = gramian_riccati_matrix(sys, t, 1.0);
      const Matrix G = related_gramian(sys, t, 1.0).value;
      const Matrix rhs = sys.C().transpose() * G.inverse() * sys.C();
      EXPECT_LE((P - rhs).norm(), 1e-8 * rhs.norm()) << t;
    }
  }
}

TEST(Gramian, RawQuadratureNearlySymmetric) {
  const LtiSystem sys = three_state();
  const auto integrand = [&](double s) -> Matrix {
    const Matrix eB = mat_exp(sys.A(), 1.0 - s) * sys.B();
    return eB * eB.transpose();
  };
  const Matrix raw = integrate_matrix(integrand, 0.0, 1.0);
  EXPECT_LE(asymmetry(raw), 1e-12);
  const Matrix W = output_gramian(sys, 0.0, 1.0).value;
  EXPECT_EQ(asymmetry(W), 0.0);
  EXPECT_NEAR(W(0, 0), (sys.C() * raw * sys.C().transpose())(0, 0), 1e-14);
}

}  // namespace
}  // namespace optcons
