#pragma once

#include <vector>

#include "optcons/numkit.hpp"

namespace optcons {

/// Positive per-agent control penalties a = (a_1, ..., a_N), N >= 2.
class WeightVector {
 public:
  explicit WeightVector(Vector a);
  WeightVector(std::initializer_list<double> a);

  int size() const { return static_cast<int>(a_.size()); }
  double operator[](int i) const { return a_(i); }
  const Vector& values() const { return a_; }
  double total() const { return a_.sum(); }
  /// (sum a_i)^{-1}
  double alpha() const { return 1.0 / a_.sum(); }

  /// a-weighted average of per-agent blocks stacked in `stacked`
  /// (block size = stacked.size() / N).
  Vector weighted_average(const Vector& stacked) const;

 private:
  Vector a_;
};

/// L(a) = I_N - (sum a_i)^{-1} 1_N a^T.
Matrix consensus_weight_matrix(const WeightVector& a);

/// Factors with agent 1 as the reference agent:
///   V1 = [1/a_1 1_{N-1}, -diag(1/a_2..1/a_N)]
///   V2 = diag(1/a_2..1/a_N) + 1/a_1 1 1^T
///   V3 = [-1_{N-1}, I_{N-1}]
struct FactorMatrices {
  Matrix V1;
  Matrix V2;
  Matrix V3;
};

FactorMatrices factor_matrices(const WeightVector& a);

/// |L(a) + V1^T V2^{-1} V3|_F.
double factorization_residual(const WeightVector& a);
bool verify_factorization(const WeightVector& a, double tol);

/// Applies (L(a) (x) I_block) to a stacked vector without forming the
/// Kronecker product.
Vector apply_consensus_weights(const WeightVector& a, const Vector& stacked);

}  // namespace optcons
