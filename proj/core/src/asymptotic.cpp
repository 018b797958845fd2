#include "optcons/asymptotic.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"

namespace optcons {

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

constexpr double kPbhTol = 1e-9;

void require_off_imaginary_axis(const Matrix& A) {
  const double scale = A.norm();
  for (const Complex& lambda : eigenvalues(A)) {
    if (std::abs(lambda.real()) <= kImaginaryAxisTol * scale)
      fail(ErrorCode::ImaginaryAxisEigenvalue,
           "A has an eigenvalue on the imaginary axis (" +
               std::to_string(lambda.real()) + " + " +
               std::to_string(lambda.imag()) + "i)");
  }
}

// PBH test: rank [lambda I - A, B] = n for every eigenvalue with Re >= 0.
bool pbh_full_rank_on_unstable(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  for (const Complex& lambda : eigenvalues(A)) {
    if (lambda.real() < 0.0) continue;
    ComplexMatrix M(n, n + B.cols());
    M.leftCols(n) = lambda * ComplexMatrix::Identity(n, n) - A.cast<Complex>();
    M.rightCols(B.cols()) = B.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= kPbhTol * std::max(1.0, sv(0))) return false;
  }
  return true;
}

// Swaps diagonal entries k and k+1 of the upper-triangular T, updating U so
// that U T U^H is preserved.
void swap_schur_pair(ComplexMatrix& T, ComplexMatrix& U, Eigen::Index k) {
  const Complex t11 = T(k, k);
  const Complex t22 = T(k + 1, k + 1);
  // Eigenvector of the 2x2 block for t22 becomes the new leading vector.
  Eigen::Vector2cd x(T(k, k + 1), t22 - t11);
  const double len = x.norm();
  if (len == 0.0) return;
  x /= len;
  Eigen::Matrix2cd G;
  G << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
  T.middleCols(k, 2) = T.middleCols(k, 2) * G;
  T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
  U.middleCols(k, 2) = U.middleCols(k, 2) * G;
  T(k + 1, k) = 0.0;
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
}

// Reorders the Schur form so eigenvalues with negative real part lead.
void order_stable_first(ComplexMatrix& T, ComplexMatrix& U) {
  const Eigen::Index size = T.rows();
  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (Eigen::Index k = 0; k + 1 < size; ++k) {
      if (T(k, k).real() >= 0.0 && T(k + 1, k + 1).real() < 0.0) {
        swap_schur_pair(T, U, k);
        swapped = true;
      }
    }
  }
}

double are_residual(const Matrix& A, const Matrix& BBt, const Matrix& P) {
  return (A.transpose() * P + P * A - P * BBt * P).norm();
}

class StateGainLaw final : public LawImpl {
 public:
  StateGainLaw(WeightVector a, Matrix gain)
      : a_(std::move(a)), gain_(std::move(gain)) {}

  Vector control(double, const Vector& x, const Vector&,
                 const Vector&) const override {
    const Vector rel = apply_consensus_weights(a_, x);
    const Eigen::Index n = gain_.cols();
    const Eigen::Index m = gain_.rows();
    Vector u(a_.size() * m);
    for (int i = 0; i < a_.size(); ++i)
      u.segment(i * m, m) = -gain_ * rel.segment(i * n, n);
    return u;
  }

 private:
  WeightVector a_;
  Matrix gain_;  // m x n
};

class OutputGainLaw final : public LawImpl {
 public:
  OutputGainLaw(WeightVector a, Matrix gain)
      : a_(std::move(a)), gain_(std::move(gain)) {}

  Vector control(double, const Vector&, const Vector& y,
                 const Vector&) const override {
    const Vector rel = apply_consensus_weights(a_, y);
    const Eigen::Index p = gain_.cols();
    const Eigen::Index m = gain_.rows();
    Vector u(a_.size() * m);
    for (int i = 0; i < a_.size(); ++i)
      u.segment(i * m, m) = -gain_ * rel.segment(i * p, p);
    return u;
  }

 private:
  WeightVector a_;
  Matrix gain_;  // m x p
};

class ObserverLaw final : public LawImpl {
 public:
  ObserverLaw(WeightVector a, const LtiSystem& sys, const Matrix& P0,
              const Matrix& Q)
      : a_(std::move(a)),
        n_(sys.n()),
        m_(sys.m()),
        p_(sys.p()),
        C_(sys.C()),
        BtP0_(sys.B().transpose() * P0),
        closed_(sys.A() - sys.B() * BtP0_),
        QCt_(Q * sys.C().transpose()) {}

  Vector control(double, const Vector&, const Vector&,
                 const Vector& internal) const override {
    Vector u(a_.size() * m_);
    for (int i = 0; i < a_.size(); ++i)
      u.segment(i * m_, m_) = -BtP0_ * internal.segment(i * n_, n_);
    return u;
  }

  int internal_dim() const override { return a_.size() * n_; }

  Vector internal_rate(double, const Vector& y,
                       const Vector& internal) const override {
    // r_i = y_i - y_c equals (sum a)^{-1} sum_j a_j (y_i - y_j).
    const Vector residual = apply_consensus_weights(a_, y);
    Vector rate(internal.size());
    for (int i = 0; i < a_.size(); ++i) {
      const Vector dhat = internal.segment(i * n_, n_);
      rate.segment(i * n_, n_) =
          closed_ * dhat - QCt_ * (residual.segment(i * p_, p_) - C_ * dhat);
    }
    return rate;
  }

 private:
  WeightVector a_;
  int n_;
  int m_;
  int p_;
  Matrix C_;
  Matrix BtP0_;
  Matrix closed_;
  Matrix QCt_;
};

}  // namespace

bool is_stabilizable(const Matrix& A, const Matrix& B) {
  require_square(A, "A");
  if (B.rows() != A.rows())
    fail(ErrorCode::DimensionMismatch, "B must have as many rows as A");
  return pbh_full_rank_on_unstable(A, B);
}

bool is_detectable(const Matrix& A, const Matrix& C) {
  require_square(A, "A");
  if (C.cols() != A.cols())
    fail(ErrorCode::DimensionMismatch, "C must have as many columns as A");
  return pbh_full_rank_on_unstable(A.transpose(), C.transpose());
}

Matrix solve_lyapunov(const Matrix& F, const Matrix& R) {
  require_square(F, "F");
  const Eigen::Index n = F.rows();
  if (R.rows() != n || R.cols() != n)
    fail(ErrorCode::DimensionMismatch, "Lyapunov right-hand side has wrong shape");
  const Matrix I = Matrix::Identity(n, n);
  const Matrix op = kron(I, F.transpose()) + kron(F.transpose(), I);
  const Vector rhs = -Eigen::Map<const Vector>(R.data(), n * n);
  Eigen::FullPivLU<Matrix> lu(op);
  if (!lu.isInvertible())
    fail(ErrorCode::SingularInnerMatrix, "Lyapunov operator is singular");
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

RiccatiSolution solve_are(const Matrix& A, const Matrix& B) {
  require_square(A, "A");
  if (B.rows() != A.rows())
    fail(ErrorCode::DimensionMismatch, "B must have as many rows as A");
  require_finite(A, "A");
  require_finite(B, "B");
  require_off_imaginary_axis(A);
  if (!pbh_full_rank_on_unstable(A, B))
    fail(ErrorCode::NotStabilizable, "(A, B) is not stabilizable");

  const Eigen::Index n = A.rows();
  const Matrix BBt = B * B.transpose();
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -BBt;
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::ComplexSchur<ComplexMatrix> schur(H.cast<Complex>());
  if (schur.info() != Eigen::Success)
    fail(ErrorCode::NonFinite, "Schur decomposition did not converge");
  ComplexMatrix T = schur.matrixT();
  ComplexMatrix U = schur.matrixU();
  order_stable_first(T, U);

  const ComplexMatrix X1 = U.topLeftCorner(n, n);
  const ComplexMatrix X2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<ComplexMatrix> lu(X1);
  if (!lu.isInvertible())
    fail(ErrorCode::NotStabilizable,
         "stable invariant subspace is not a graph over the state space");
  // P X1 = X2  <=>  X1^T P^T = X2^T.
  const ComplexMatrix Pc =
      X1.transpose().fullPivLu().solve(X2.transpose()).transpose();
  Matrix P = symmetrized(Pc.real());

  // Kleinman steps: (A - B K)^T P + P (A - B K) + K^T K = 0 with K = B^T P,
  // kept while the residual keeps shrinking.
  for (int iter = 0; iter < 3; ++iter) {
    const Matrix K = B.transpose() * P;
    const Matrix F = A - B * K;
    const double before = are_residual(A, BBt, P);
    if (before == 0.0) break;
    try {
      const Matrix refined = symmetrized(solve_lyapunov(F, K.transpose() * K));
      if (!refined.allFinite() || !(are_residual(A, BBt, refined) < before)) break;
      P = refined;
    } catch (const Error&) {
      break;  // singular Lyapunov operator: keep the current iterate
    }
  }

  RiccatiSolution sol;
  sol.P0 = P;
  sol.residual = are_residual(A, BBt, P);
  sol.closed_loop_spectrum = eigenvalues(A - BBt * P);
  return sol;
}

Matrix solve_dre(const LtiSystem& sys, double t, double T,
                 const QuadratureConfig& cfg) {
  return gramian_riccati_matrix(sys, t, T, cfg);
}

Matrix asymptotic_state_gain(const WeightVector& a, const LtiSystem& sys,
                             const RiccatiSolution& sol) {
  return kron(consensus_weight_matrix(a), sys.B().transpose() * sol.P0);
}

Matrix output_riccati_matrix(const LtiSystem& sys, const RiccatiSolution& sol) {
  const Matrix& C = sys.C();
  const Matrix CCt_inv = (C * C.transpose()).inverse();
  return symmetrized(CCt_inv * C * sol.P0 * C.transpose() * CCt_inv);
}

namespace {

Matrix output_law_gain(const LtiSystem& sys, const RiccatiSolution& sol) {
  if (!is_kernel_A_invariant(sys))
    fail(ErrorCode::KernelNotInvariant,
         "asymptotic output feedback requires ker(C) to be A-invariant");
  if (!is_detectable(sys.A(), sys.C()))
    fail(ErrorCode::NotDetectable,
         "asymptotic output feedback requires the modes in ker(C) to be "
         "stable; P0 does not vanish on ker(C)");
  return sys.B().transpose() * sys.C().transpose() *
         output_riccati_matrix(sys, sol);
}

}  // namespace

Matrix asymptotic_output_gain(const WeightVector& a, const LtiSystem& sys,
                              const RiccatiSolution& sol) {
  return kron(consensus_weight_matrix(a), output_law_gain(sys, sol));
}

ObserverDesign solve_observer_are(const Matrix& A, const Matrix& C) {
  require_square(A, "A");
  if (C.cols() != A.cols())
    fail(ErrorCode::DimensionMismatch, "C must have as many columns as A");
  require_off_imaginary_axis(A);
  if (!is_detectable(A, C))
    fail(ErrorCode::NotDetectable, "(A, C) is not detectable");
  const RiccatiSolution dual = solve_are(A.transpose(), C.transpose());
  ObserverDesign obs;
  obs.Q = -dual.P0;
  const Matrix CtC = C.transpose() * C;
  obs.residual = (A * obs.Q + obs.Q * A.transpose() + obs.Q * CtC * obs.Q).norm();
  obs.error_spectrum = eigenvalues(A + obs.Q * CtC);
  return obs;
}

ControlLaw observer_consensus_law(const WeightVector& a, const LtiSystem& sys,
                                  const RiccatiSolution& sol,
                                  const ObserverDesign& obs) {
  return ControlLaw(LawKind::ObserverBased,
                    std::make_shared<ObserverLaw>(a, sys, sol.P0, obs.Q));
}

ControlLaw make_asymptotic_law(const LtiSystem& sys, const WeightVector& a,
                               LawKind kind) {
  const RiccatiSolution sol = solve_are(sys.A(), sys.B());
  switch (kind) {
    case LawKind::AsymptoticState:
      return ControlLaw(kind, std::make_shared<StateGainLaw>(
                                  a, sys.B().transpose() * sol.P0));
    case LawKind::AsymptoticOutput:
      return ControlLaw(kind, std::make_shared<OutputGainLaw>(
                                  a, output_law_gain(sys, sol)));
    case LawKind::ObserverBased:
      return observer_consensus_law(a, sys, sol,
                                    solve_observer_are(sys.A(), sys.C()));
    default:
      fail(ErrorCode::InvalidArgument,
           std::string(to_string(kind)) + " is not an asymptotic law");
  }
}

}  // namespace optcons
