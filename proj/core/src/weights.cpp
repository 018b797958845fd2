#include "optcons/weights.hpp"

#include <cmath>
#include <string>

#include "optcons/errors.hpp"

namespace optcons {

WeightVector::WeightVector(Vector a) : a_(std::move(a)) {
  if (a_.size() < 2)
    fail(ErrorCode::InvalidArgument, "at least two agents are required");
  for (Eigen::Index i = 0; i < a_.size(); ++i) {
    if (!std::isfinite(a_(i)) || !(a_(i) > 0.0))
      fail(ErrorCode::InvalidArgument,
           "weights must be positive (a_" + std::to_string(i + 1) + " = " +
               std::to_string(a_(i)) + ")");
  }
}

WeightVector::WeightVector(std::initializer_list<double> a)
    : WeightVector(Vector(Eigen::Map<const Vector>(
          a.begin(), static_cast<Eigen::Index>(a.size())))) {}

Vector WeightVector::weighted_average(const Vector& stacked) const {
  const Eigen::Index n = a_.size();
  if (stacked.size() % n != 0)
    fail(ErrorCode::DimensionMismatch,
         "stacked vector length is not a multiple of the agent count");
  const Eigen::Index block = stacked.size() / n;
  Vector avg = Vector::Zero(block);
  for (Eigen::Index i = 0; i < n; ++i)
    avg += a_(i) * stacked.segment(i * block, block);
  return avg / a_.sum();
}

Matrix consensus_weight_matrix(const WeightVector& a) {
  const int n = a.size();
  return Matrix::Identity(n, n) -
         a.alpha() * Vector::Ones(n) * a.values().transpose();
}

FactorMatrices factor_matrices(const WeightVector& a) {
  const int n = a.size();
  const Vector inv_tail = a.values().tail(n - 1).cwiseInverse();
  const double inv_ref = 1.0 / a[0];

  FactorMatrices f;
  f.V1 = Matrix::Zero(n - 1, n);
  f.V1.col(0).setConstant(inv_ref);
  f.V1.rightCols(n - 1) = -Matrix(inv_tail.asDiagonal());

  f.V2 = Matrix(inv_tail.asDiagonal()) +
         inv_ref * Matrix::Ones(n - 1, n - 1);

  f.V3 = Matrix::Zero(n - 1, n);
  f.V3.col(0).setConstant(-1.0);
  f.V3.rightCols(n - 1).setIdentity();
  return f;
}

double factorization_residual(const WeightVector& a) {
  const FactorMatrices f = factor_matrices(a);
  const Matrix product = f.V1.transpose() * f.V2.llt().solve(f.V3);
  return (consensus_weight_matrix(a) + product).norm();
}

bool verify_factorization(const WeightVector& a, double tol) {
  return factorization_residual(a) <= tol;
}

Vector apply_consensus_weights(const WeightVector& a, const Vector& stacked) {
  // L(a) (x) I applied blockwise is v_i - weighted_average(v).
  const Eigen::Index n = a.size();
  const Vector avg = a.weighted_average(stacked);
  const Eigen::Index block = avg.size();
  Vector out(stacked.size());
  for (Eigen::Index i = 0; i < n; ++i)
    out.segment(i * block, block) = stacked.segment(i * block, block) - avg;
  return out;
}

}  // namespace optcons
