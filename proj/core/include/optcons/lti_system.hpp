#pragma once

#include "optcons/numkit.hpp"

namespace optcons {

/// One agent's plant: xdot = A x + B u, y = C x.
///
/// Construction checks dimensions, finiteness, full column rank of B and
/// full row rank of C.
class LtiSystem {
 public:
  LtiSystem(Matrix A, Matrix B, Matrix C);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int p() const { return static_cast<int>(C_.rows()); }

  bool operator==(const LtiSystem& other) const;

 private:
  Matrix A_;
  Matrix B_;
  Matrix C_;
};

}  // namespace optcons
