#pragma once

#include <complex>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace optcons {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = std::vector<std::complex<double>>;

/// Settings for composite Gauss-Legendre quadrature with global panel
/// bisection.
struct QuadratureConfig {
  int nodes_per_panel = 10;
  double rel_tol = 1e-12;
  int max_bisections = 20;

  void validate() const;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

/// e^{M t} by scaling and squaring with Pade approximants.
Matrix mat_exp(const Matrix& M, double t);

/// Entry-wise integral of a matrix-valued function over [t0, t1].
///
/// The interval is split into 1, 2, 4, ... equal panels, each integrated
/// with a `nodes_per_panel`-point Gauss-Legendre rule, until two successive
/// estimates differ by at most `rel_tol` in relative Frobenius norm. Throws
/// ToleranceNotMet when `max_bisections` levels are exhausted.
Matrix integrate_matrix(const std::function<Matrix(double)>& f, double t0,
                        double t1, const QuadratureConfig& cfg = {});

Matrix kron(const Matrix& A, const Matrix& B);

/// Orthonormal basis of {v : |Mv| <= tol |M| |v|}; zero columns when the
/// kernel is trivial.
Matrix nullspace_basis(const Matrix& M, double tol);
Matrix nullspace_basis(const Matrix& M);

/// machine-epsilon * max(rows, cols), the relative numerical-rank threshold.
double default_rank_tol(const Matrix& M);
int numerical_rank(const Matrix& M, double tol);
int numerical_rank(const Matrix& M);

Matrix symmetrized(const Matrix& M);
double asymmetry(const Matrix& M);

ComplexVector eigenvalues(const Matrix& M);

void require_square(const Matrix& M, std::string_view what);
void require_finite(const Matrix& M, std::string_view what);

}  // namespace optcons
