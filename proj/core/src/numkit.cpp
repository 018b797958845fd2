#include "optcons/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "optcons/errors.hpp"

namespace optcons {

void QuadratureConfig::validate() const {
  if (nodes_per_panel < 2)
    fail(ErrorCode::InvalidArgument, "nodes_per_panel must be >= 2");
  if (!(rel_tol > 0.0))
    fail(ErrorCode::InvalidArgument, "rel_tol must be positive");
  if (max_bisections < 1)
    fail(ErrorCode::InvalidArgument, "max_bisections must be >= 1");
}

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gauss-Legendre order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Nodes are symmetric about 0; Newton from Chebyshev-like guesses.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Matrix mat_exp(const Matrix& M, double t) {
  require_square(M, "mat_exp argument");
  require_finite(M, "mat_exp argument");
  if (M.size() == 0) return M;
  const Matrix scaled = M * t;
  return scaled.exp();
}

namespace {

Matrix composite_rule(const std::function<Matrix(double)>& f, double t0,
                      double t1, int panels, const GaussLegendreRule& rule,
                      Eigen::Index rows, Eigen::Index cols) {
  Matrix sum = Matrix::Zero(rows, cols);
  const double width = (t1 - t0) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = t0 + k * width;
    const double mid = a + 0.5 * width;
    Matrix panel = Matrix::Zero(rows, cols);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const Matrix v = f(mid + 0.5 * width * rule.nodes[j]);
      if (v.rows() != rows || v.cols() != cols)
        fail(ErrorCode::DimensionMismatch,
             "integrand changed shape during quadrature");
      panel += rule.weights[j] * v;
    }
    sum += (0.5 * width) * panel;
  }
  return sum;
}

}  // namespace

Matrix integrate_matrix(const std::function<Matrix(double)>& f, double t0,
                        double t1, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(t0 <= t1))
    fail(ErrorCode::InvalidArgument, "integrate_matrix requires t0 <= t1");
  const Matrix probe = f(t0);
  if (t0 == t1) return Matrix::Zero(probe.rows(), probe.cols());

  const GaussLegendreRule rule = gauss_legendre(cfg.nodes_per_panel);
  Matrix previous =
      composite_rule(f, t0, t1, 1, rule, probe.rows(), probe.cols());
  for (int level = 1; level <= cfg.max_bisections; ++level) {
    Matrix current = composite_rule(f, t0, t1, 1 << level, rule, probe.rows(),
                                    probe.cols());
    const double change = (current - previous).norm();
    const double scale = current.norm();
    if (!std::isfinite(change) || !std::isfinite(scale))
      fail(ErrorCode::NonFinite, "integrand produced non-finite values");
    if (change <= cfg.rel_tol * scale || (scale == 0.0 && change == 0.0))
      return current;
    previous = std::move(current);
  }
  fail(ErrorCode::ToleranceNotMet,
       "quadrature did not reach relative tolerance " +
           std::to_string(cfg.rel_tol) + " within " +
           std::to_string(cfg.max_bisections) + " bisections");
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

double default_rank_tol(const Matrix& M) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(M.rows(), M.cols()));
}

Matrix nullspace_basis(const Matrix& M, double tol) {
  if (!(tol > 0.0))
    fail(ErrorCode::InvalidArgument, "nullspace tolerance must be positive");
  const Eigen::Index n = M.cols();
  if (n == 0) return Matrix(0, 0);
  if (M.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix nullspace_basis(const Matrix& M) {
  return nullspace_basis(M, default_rank_tol(M));
}

int numerical_rank(const Matrix& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++rank;
  return rank;
}

int numerical_rank(const Matrix& M) {
  return numerical_rank(M, default_rank_tol(M));
}

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double asymmetry(const Matrix& M) {
  const double scale = M.norm();
  if (scale == 0.0) return 0.0;
  return (M - M.transpose()).norm() / scale;
}

ComplexVector eigenvalues(const Matrix& M) {
  require_square(M, "eigenvalue argument");
  ComplexVector out;
  if (M.size() == 0) return out;
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NonFinite, "eigenvalue computation did not converge");
  const auto& ev = es.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

void require_square(const Matrix& M, std::string_view what) {
  if (M.rows() != M.cols())
    fail(ErrorCode::NonSquare, std::string(what) + " must be square, got " +
                                   std::to_string(M.rows()) + "x" +
                                   std::to_string(M.cols()));
}

void require_finite(const Matrix& M, std::string_view what) {
  if (!M.allFinite())
    fail(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

}  // namespace optcons
