#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "optcons/asymptotic.hpp"
#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"
#include "optcons/network.hpp"
#include "optcons/sim.hpp"

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

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix M(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

double are_residual(const Matrix& A, const Matrix& B, const Matrix& P) {
  return (A.transpose() * P + P * A - P * B * B.transpose() * P).norm();
}

TEST(Are, UnstableScalar) {
  const auto sol = solve_are(mat({{1}}), mat({{1}}));
  EXPECT_NEAR(sol.P0(0, 0), 2.0, 1e-10);
  ASSERT_EQ(sol.closed_loop_spectrum.size(), 1u);
  EXPECT_NEAR(sol.closed_loop_spectrum[0].real(), -1.0, 1e-10);
}

TEST(Are, HurwitzGivesZero) {
  const auto sol = solve_are(mat({{-1}}), mat({{1}}));
  EXPECT_NEAR(sol.P0(0, 0), 0.0, 1e-14);
  EXPECT_LE(sol.residual, 1e-14);
}

TEST(Are, DecoupledDiagonal) {
  const auto sol = solve_are(mat({{1, 0}, {0, -1}}), Matrix::Identity(2, 2));
  EXPECT_LE((sol.P0 - mat({{2, 0}, {0, 0}})).norm(), 1e-10);
}

TEST(Are, RejectsImaginaryAxisAndUnstabilizable) {
  EXPECT_EQ(code_of([] { solve_are(mat({{0, 1}, {-1, 0}}), mat({{0}, {1}})); }),
            ErrorCode::ImaginaryAxisEigenvalue);
  EXPECT_EQ(code_of([] { solve_are(mat({{0}}), mat({{1}})); }),
            ErrorCode::ImaginaryAxisEigenvalue);
  EXPECT_EQ(code_of([] { solve_are(mat({{1, 0}, {0, 2}}), mat({{1}, {0}})); }),
            ErrorCode::NotStabilizable);
}

// Random stabilizable pairs with spectra bounded away from the axis.
Matrix random_dichotomic(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> mag(0.1, 2.0);
  std::bernoulli_distribution sign(0.5);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  const Matrix S = random_matrix(rng, n, n) + 2.0 * Matrix::Identity(n, n);
  return S * d.asDiagonal() * S.inverse();
}

TEST(Are, RandomBattery) {
  std::mt19937 rng(314);
  std::uniform_int_distribution<int> dim(1, 6);
  int solved = 0;
  int ill_conditioned = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = dim(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    const Matrix A = random_dichotomic(rng, n);
    const Matrix B = random_matrix(rng, n, m);
    if (!is_stabilizable(A, B)) continue;
    const auto sol = solve_are(A, B);
    ++solved;
    const double scale = 1.0 + sol.P0.squaredNorm();
    EXPECT_LE(are_residual(A, B, sol.P0), 1e-9 * scale) << trial;
    EXPECT_LE(asymmetry(sol.P0), 1e-10) << trial;
    const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sol.P0));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * (1.0 + sol.P0.norm())) << trial;
    // One input steering several nearby unstable modes gives |P0| ~ 1e6..1e12;
    // the stabilizing property is then below double precision.
    if (sol.P0.norm() > 1e4) {
      ++ill_conditioned;
      continue;
    }
    for (const auto& lambda : sol.closed_loop_spectrum) EXPECT_LT(lambda.real(), 0.0) << trial;
  }
  EXPECT_GT(solved, 40);
  EXPECT_LE(ill_conditioned, 5);
}

TEST(Are, VanishesOnStableSubspace) {
  const Matrix A = mat({{1, 0}, {0, -2}});
  const auto sol = solve_are(A, mat({{1}, {1}}));
  EXPECT_LE((sol.P0 * Vector::Unit(2, 1)).norm(), 1e-10);
}

TEST(Lyapunov, SolvesRandomStableEquation) {
  std::mt19937 rng(12);
  const Matrix F = random_matrix(rng, 4, 4) - 4.0 * Matrix::Identity(4, 4);
  const Matrix R = random_spd(rng, 4);
  const Matrix X = solve_lyapunov(F, R);
  EXPECT_LE((F.transpose() * X + X * F + R).norm(), 1e-12 * X.norm());
}

TEST(Dre, SingleIntegratorClosedForm) {
  const LtiSystem sys = single_integrator();
  for (double t : {0.0, 0.5, 0.9}) {
    const double P = solve_dre(sys, t, 1.0)(0, 0);
    EXPECT_NEAR(P, 1.0 / (1.0 - t), 1e-12);
  }
}

TEST(Dre, FiniteDifferenceResidual) {
  for (const LtiSystem& sys : {scalar(1.0), scalar(-1.0), double_integrator_full_output(),
                               three_state(), invariant_two_state()}) {
    for (double delta : {0.5, 1.0, 2.0}) {
      const double T = 3.0, t = T - delta;
      const double h = 1e-5 * delta;
      const Matrix P = solve_dre(sys, t, T);
      const Matrix dP = (solve_dre(sys, t + h, T) - solve_dre(sys, t - h, T)) / (2 * h);
      const Matrix& A = sys.A();
      const Matrix& B = sys.B();
      const Matrix rhs = -A.transpose() * P - P * A + P * B * B.transpose() * P;
      EXPECT_LE((dP - rhs).norm(), 1e-4 * std::max(rhs.norm(), P.norm())) << delta;
    }
  }
}

TEST(Dre, ConvergesToAre) {
  const LtiSystem sys = scalar(1.0);
  EXPECT_NEAR(solve_dre(sys, 0.0, 20.0)(0, 0), solve_are(sys.A(), sys.B()).P0(0, 0), 1e-6);
  // Two-state, full output: T = 40 / |Re lambda_min|.
  const LtiSystem two(mat({{1, 0}, {0, 0.5}}), mat({{1}, {1}}), Matrix::Identity(2, 2));
  const Matrix P0 = solve_are(two.A(), two.B()).P0;
  EXPECT_LE((solve_dre(two, 0.0, 80.0) - P0).norm(), 1e-6);
}

TEST(AsymptoticGains, ScalarExample) {
  const LtiSystem sys = scalar(1.0);
  const auto sol = solve_are(sys.A(), sys.B());
  const Matrix K = asymptotic_state_gain({1, 1}, sys, sol);
  EXPECT_LE((K - mat({{1, -1}, {-1, 1}})).norm(), 1e-10);
  EXPECT_NEAR(output_riccati_matrix(sys, sol)(0, 0), 2.0, 1e-10);
  EXPECT_LE((asymptotic_output_gain({1, 1}, sys, sol) - K).norm(), 1e-10);
}

TEST(AsymptoticGains, HurwitzGivesZeroGain) {
  const LtiSystem sys = scalar(-2.0);
  EXPECT_LE(asymptotic_state_gain({1, 3}, sys, solve_are(sys.A(), sys.B())).norm(), 1e-14);
}

TEST(AsymptoticGains, FullOutputMatchesState) {
  const LtiSystem sys(mat({{1, 0.5}, {0, -1}}), mat({{0}, {1}}), Matrix::Identity(2, 2));
  const auto sol = solve_are(sys.A(), sys.B());
  const WeightVector a{1, 2, 3};
  EXPECT_LE((asymptotic_output_gain(a, sys, sol) - asymptotic_state_gain(a, sys, sol)).norm(),
            1e-10);
}

TEST(AsymptoticGains, ScaleFreeInWeights) {
  const LtiSystem sys = scalar(1.0);
  const auto sol = solve_are(sys.A(), sys.B());
  EXPECT_EQ(asymptotic_state_gain({1, 2, 3}, sys, sol),
            asymptotic_state_gain({2, 4, 6}, sys, sol));
}

TEST(AsymptoticGains, OutputLawNeedsInvariantDetectableKernel) {
  const auto check = [](const LtiSystem& sys) {
    return code_of([&] {
      asymptotic_output_gain({1, 1}, sys, solve_are(sys.A(), sys.B()));
    });
  };
  Matrix B(2, 1);
  B << 1, 0;
  EXPECT_EQ(check(LtiSystem(mat({{1, 1}, {0, -2}}), B, mat({{1, 0}}))),
            ErrorCode::KernelNotInvariant);
  // Unstable mode hidden in ker(C): C^T G0 C cannot equal P0.
  EXPECT_EQ(check(LtiSystem(mat({{1, 0}, {2, 3}}), mat({{1}, {1}}), mat({{1, 0}}))),
            ErrorCode::NotDetectable);
}

TEST(AsymptoticGains, OutputLawMatchesStateLawOnRuns) {
  const LtiSystem sys = invariant_two_state();
  const auto sol = solve_are(sys.A(), sys.B());
  const WeightVector a{1, 2, 1};
  const Matrix Kx = asymptotic_state_gain(a, sys, sol);
  const Matrix Ky = asymptotic_output_gain(a, sys, sol);
  const AgentNetwork net(sys, 3);
  Vector x0(6);
  x0 << 1, 0, -1, 1, 0.5, -0.5;
  const Trajectory traj = simulate(net, a, x0, 0.0, 5.0, make_asymptotic_law(sys, a, LawKind::AsymptoticState));
  for (std::size_t k = 0; k < traj.size(); k += 100) {
    const Vector ux = -Kx * traj.states[k];
    const Vector uy = -Ky * net.outputs(traj.states[k]);
    EXPECT_LE((ux - uy).norm(), 1e-8 * std::max(1.0, ux.norm()));
  }
}

TEST(Observer, ScalarExample) {
  const auto obs = solve_observer_are(mat({{1}}), mat({{1}}));
  EXPECT_NEAR(obs.Q(0, 0), -2.0, 1e-10);
  ASSERT_EQ(obs.error_spectrum.size(), 1u);
  EXPECT_NEAR(obs.error_spectrum[0].real(), -1.0, 1e-10);
}

TEST(Observer, HurwitzAndDecoupled) {
  EXPECT_NEAR(solve_observer_are(mat({{-3}}), mat({{1}})).Q(0, 0), 0.0, 1e-14);
  EXPECT_LE((solve_observer_are(mat({{1, 0}, {0, -1}}), Matrix::Identity(2, 2)).Q -
             mat({{-2, 0}, {0, 0}})).norm(), 1e-10);
}

TEST(Observer, RejectsUndetectable) {
  EXPECT_EQ(code_of([] { solve_observer_are(mat({{1, 0}, {0, 2}}), mat({{1, 0}})); }),
            ErrorCode::NotDetectable);
}

TEST(Observer, SpectrumMirrorsAntistableModes) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    const Matrix A = random_dichotomic(rng, n);
    const Matrix C = random_matrix(rng, 1 + trial % n, n);
    if (!is_detectable(A, C)) continue;
    const auto obs = solve_observer_are(A, C);
    EXPECT_LE((A * obs.Q + obs.Q * A.transpose() + obs.Q * C.transpose() * C * obs.Q).norm(),
              1e-9 * (1.0 + obs.Q.squaredNorm()));
    const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(obs.Q));
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-10 * (1.0 + obs.Q.norm()));
    std::vector<double> expected, got;
    for (const auto& l : eigenvalues(A)) expected.push_back(-std::abs(l.real()));
    for (const auto& l : obs.error_spectrum) got.push_back(l.real());
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    for (std::size_t k = 0; k < got.size(); ++k)
      EXPECT_NEAR(got[k], expected[k], 1e-8) << trial;
  }
}

TEST(ObserverLaw, AugmentedSpectrum) {
  // d = x1 - x2, e-hat differences; with a = [1, 1] the relative residual of
  // agent 1 is (y1 - y2) / 2.
  const LtiSystem sys = scalar(1.0);
  const auto sol = solve_are(sys.A(), sys.B());
  const auto obs = solve_observer_are(sys.A(), sys.C());
  const WeightVector a{1, 1};
  const AgentNetwork net(sys, 2);
  Vector x0(2);
  x0 << 1, -1;
  const ControlLaw law = observer_consensus_law(a, sys, sol, obs);
  EXPECT_EQ(law.internal_dim(), 2);
  const Trajectory traj = simulate(net, a, x0, 0.0, 30.0, law);
  const double err = consensus_error(traj, 2, 30.0);
  EXPECT_LE(err, 1e-5 * 2.0);
  // Rate: both poles at -1, so error <= c (1 + t) e^{-t}.
  const double e10 = consensus_error(traj, 2, 10.0);
  const double e20 = consensus_error(traj, 2, 20.0);
  EXPECT_LE(e20 / e10, 3.0 * std::exp(-10.0));
}

TEST(ObserverLaw, ConsensualStartStaysPut) {
  const LtiSystem sys = scalar(1.0);
  const WeightVector a{1, 2};
  const ControlLaw law = make_asymptotic_law(sys, a, LawKind::ObserverBased);
  const AgentNetwork net(sys, 2);
  const Trajectory traj = simulate(net, a, Vector::Constant(2, 0.3), 0.0, 2.0, law);
  for (const auto& u : traj.controls) EXPECT_LE(u.norm(), 1e-15);
  EXPECT_LE(consensus_error(traj, 2, 2.0), 1e-15);
}

TEST(ObserverLaw, HurwitzPlantNeedsNoControl) {
  const LtiSystem sys = scalar(-1.0);
  const WeightVector a{1, 1};
  const AgentNetwork net(sys, 2);
  Vector x0(2);
  x0 << 1, -1;
  const Trajectory traj =
      simulate(net, a, x0, 0.0, 30.0, make_asymptotic_law(sys, a, LawKind::ObserverBased));
  for (const auto& u : traj.controls) EXPECT_LE(u.norm(), 1e-14);
  EXPECT_LE(consensus_error(traj, 2, 30.0), 1e-5 * 2.0);
}

}  // namespace
}  // namespace optcons
