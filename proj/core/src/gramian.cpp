#include "optcons/gramian.hpp"

#include <limits>
#include <string>

#include "optcons/errors.hpp"

namespace optcons {

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  require_square(A_, "A");
  if (A_.rows() == 0) fail(ErrorCode::DimensionMismatch, "A must be non-empty");
  if (B_.rows() != A_.rows())
    fail(ErrorCode::DimensionMismatch,
         "B has " + std::to_string(B_.rows()) + " rows, A has " +
             std::to_string(A_.rows()));
  if (C_.cols() != A_.cols())
    fail(ErrorCode::DimensionMismatch,
         "C has " + std::to_string(C_.cols()) + " columns, A has " +
             std::to_string(A_.cols()));
  if (B_.cols() == 0 || C_.rows() == 0)
    fail(ErrorCode::DimensionMismatch, "B and C must be non-empty");
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(C_, "C");
  if (numerical_rank(B_) != B_.cols())
    fail(ErrorCode::InvalidArgument, "B must have full column rank");
  if (numerical_rank(C_) != C_.rows())
    fail(ErrorCode::InvalidArgument, "C must have full row rank");
}

bool LtiSystem::operator==(const LtiSystem& other) const {
  return A_ == other.A_ && B_ == other.B_ && C_ == other.C_;
}

namespace {

void require_interval(double t, double T) {
  if (!(t < T))
    fail(ErrorCode::DegenerateInterval,
         "Gramian interval requires t < T (t = " + std::to_string(t) +
             ", T = " + std::to_string(T) + ")");
}

double condition_of(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

GramianResult finish(Matrix raw, double t, double T) {
  GramianResult r;
  r.value = symmetrized(raw);
  r.t = t;
  r.T = T;
  r.condition_estimate = condition_of(r.value);
  return r;
}

}  // namespace

GramianResult output_gramian(const LtiSystem& sys, double t, double T,
                             const QuadratureConfig& cfg) {
  require_interval(t, T);
  const auto integrand = [&](double s) -> Matrix {
    const Matrix CeB = sys.C() * mat_exp(sys.A(), T - s) * sys.B();
    return CeB * CeB.transpose();
  };
  return finish(integrate_matrix(integrand, t, T, cfg), t, T);
}

GramianResult related_gramian(const LtiSystem& sys, double t, double T,
                              const QuadratureConfig& cfg) {
  require_interval(t, T);
  const auto integrand = [&](double r) -> Matrix {
    const Matrix CeB = sys.C() * mat_exp(sys.A(), -r) * sys.B();
    return CeB * CeB.transpose();
  };
  return finish(integrate_matrix(integrand, 0.0, T - t, cfg), t, T);
}

bool is_output_controllable(const LtiSystem& sys, double horizon, double tol,
                            const QuadratureConfig& cfg) {
  if (!(horizon > 0.0))
    fail(ErrorCode::InvalidArgument, "controllability horizon must be positive");
  const Matrix W = output_gramian(sys, 0.0, horizon, cfg).value;
  Eigen::SelfAdjointEigenSolver<Matrix> es(W, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = es.eigenvalues().minCoeff();
  return hi > 0.0 && lo > tol * hi;
}

bool is_kernel_A_invariant(const LtiSystem& sys, double tol) {
  const Matrix K = nullspace_basis(sys.C());
  if (K.cols() == 0) return true;
  const double residual = (sys.C() * sys.A() * K).norm();
  return residual <= tol * sys.A().norm() * sys.C().norm();
}

namespace {

// M^T (M W M^T)^{-1} M depends only on the row space of M. With an orthonormal
// basis Q of that row space it equals Q (Q^T W Q)^{-1} Q^T, which is immune
// to a badly scaled M.
Matrix row_space_projector(const Matrix& M, const Matrix& W) {
  const Eigen::ColPivHouseholderQR<Matrix> qr(M.transpose());
  if (qr.rank() < M.rows())
    fail(ErrorCode::SingularInnerMatrix,
         "C P W P^T C^T or C W C^T is singular");
  const Matrix Q = Matrix(qr.householderQ()).leftCols(M.rows());
  const Eigen::FullPivLU<Matrix> inner(Q.transpose() * W * Q);
  if (!inner.isInvertible())
    fail(ErrorCode::SingularInnerMatrix,
         "C P W P^T C^T or C W C^T is singular");
  return Q * inner.solve(Q.transpose());
}

}  // namespace

double projection_identity_residual(const Matrix& C, const Matrix& P,
                                    const Matrix& W) {
  require_square(P, "P");
  require_square(W, "W");
  if (C.cols() != P.rows() || P.rows() != W.rows())
    fail(ErrorCode::DimensionMismatch, "C, P, W dimensions disagree");

  const Matrix K = nullspace_basis(C);
  if (K.cols() > 0 &&
      (C * P * K).norm() > kInvarianceTol * C.norm() * P.norm())
    fail(ErrorCode::KernelNotInvariant, "ker(C) is not P-invariant");

  const Matrix lhs = row_space_projector(C * P, W);
  const Matrix rhs = row_space_projector(C, W);
  return (lhs - rhs).norm();
}

Matrix gramian_riccati_matrix(const LtiSystem& sys, double t, double T,
                              const QuadratureConfig& cfg) {
  const Matrix W = output_gramian(sys, t, T, cfg).value;
  Eigen::LLT<Matrix> llt(W);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotOutputControllable,
         "W(" + std::to_string(t) + ", " + std::to_string(T) +
             ") is not positive definite");
  const Matrix CeA = sys.C() * mat_exp(sys.A(), T - t);
  return symmetrized(CeA.transpose() * llt.solve(CeA));
}

}  // namespace optcons
