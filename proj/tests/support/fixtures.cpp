#include "fixtures.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "optcons/network.hpp"

namespace optcons::testing {

LtiSystem single_integrator() {
  return LtiSystem(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

LtiSystem double_integrator() {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 1, 0;
  return LtiSystem(A, B, C);
}

LtiSystem double_integrator_full_output() {
  Matrix A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  return LtiSystem(A, B, Matrix::Identity(2, 2));
}

LtiSystem scalar(double a) {
  return LtiSystem(Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

LtiSystem three_state() {
  Matrix A(3, 3), B(3, 1), C(1, 3);
  A << 0.5, 0, 0,
       1, -1, 0.5,
       0, -0.5, -2;
  B << 1, 0, 1;
  C << 1, 0, 0;
  return LtiSystem(A, B, C);
}

LtiSystem invariant_two_state() {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 1, 0, 2, -3;
  B << 1, 0;
  C << 1, 0;
  return LtiSystem(A, B, C);
}

FiniteTimeProblem problem(const LtiSystem& sys, std::vector<double> a,
                          std::vector<double> x0, double T) {
  const int N = static_cast<int>(a.size());
  return FiniteTimeProblem{
      AgentNetwork(sys, N), WeightVector(Eigen::Map<Vector>(a.data(), N)),
      Eigen::Map<Vector>(x0.data(), static_cast<Eigen::Index>(x0.size())),
      0.0, T, std::nullopt, QuadratureConfig{}};
}

std::vector<FiniteTimeProblem> rendezvous_battery() {
  return {
      problem(single_integrator(), {1, 1}, {1, -1}),
      problem(single_integrator(), {1, 2, 3, 0.5}, {2, -1, 0.5, 3}),
      problem(double_integrator(), {1, 2, 0.5}, {1, 0, -1, 0.5, 2, -1}, 2.0),
      problem(double_integrator_full_output(), {1, 1}, {1, 0, -1, 1}),
      problem(scalar(1.0), {1, 1}, {1, -1}),
      problem(scalar(-1.0), {1, 3}, {1, -1}),
      problem(three_state(), {1, 1, 2}, {1, 0.5, -0.5, -1, 0, 1, 0.5, -1, 0}, 1.5),
  };
}

WeightVector random_weights(std::mt19937& rng, int N) {
  std::uniform_real_distribution<double> d(0.1, 10.0);
  Vector a(N);
  for (int i = 0; i < N; ++i) a(i) = d(rng);
  return WeightVector(a);
}

Matrix random_matrix(std::mt19937& rng, int rows, int cols, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = d(rng);
  return M;
}

Matrix random_spd(std::mt19937& rng, int n) {
  const Matrix R = random_matrix(rng, n, n);
  const Eigen::HouseholderQR<Matrix> qr(R);
  const Matrix Q = qr.householderQ();
  std::uniform_real_distribution<double> d(0.5, 2.5);
  Vector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = d(rng);
  return Q * lambda.asDiagonal() * Q.transpose();
}

Matrix van_loan_integral(const Matrix& F, const Matrix& G, double h) {
  const Eigen::Index n = F.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -F;
  M.topRightCorner(n, n) = G * G.transpose();
  M.bottomRightCorner(n, n) = F.transpose();
  const Matrix E = (M * h).exp();
  const Matrix phi22 = E.bottomRightCorner(n, n);
  return phi22.transpose() * E.topRightCorner(n, n);
}

Matrix van_loan_output_gramian(const LtiSystem& sys, double horizon) {
  return sys.C() * van_loan_integral(sys.A(), sys.B(), horizon) * sys.C().transpose();
}

Matrix van_loan_related_gramian(const LtiSystem& sys, double horizon) {
  return sys.C() * van_loan_integral(-sys.A(), sys.B(), horizon) * sys.C().transpose();
}

std::vector<Vector> rk4_reference(const Matrix& Abig, const Matrix& Bbig,
                                  const std::function<Matrix(double)>& K,
                                  const Vector& x0, double t0, double t1,
                                  int steps) {
  const double h = (t1 - t0) / steps;
  const auto f = [&](double t, const Vector& x) -> Vector {
    return Abig * x - Bbig * (K(t) * x);
  };
  std::vector<Vector> out{x0};
  Vector x = x0;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + h / 2, x + h / 2 * k1);
    const Vector k3 = f(t + h / 2, x + h / 2 * k2);
    const Vector k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    out.push_back(x);
  }
  return out;
}

}  // namespace optcons::testing
