#pragma once

#include <random>
#include <vector>

#include "optcons/finite_time.hpp"
#include "optcons/lti_system.hpp"
#include "optcons/numkit.hpp"
#include "optcons/weights.hpp"

namespace optcons::testing {

LtiSystem single_integrator();
LtiSystem double_integrator();                 // position output
LtiSystem double_integrator_full_output();     // C = I
LtiSystem scalar(double a);                    // xdot = a x + u, y = x
/// p = 1, n = 3, ker(C) A-invariant.
LtiSystem three_state();
/// C = [1, 0], ker(C) A-invariant, (A, C) detectable.
LtiSystem invariant_two_state();

FiniteTimeProblem problem(const LtiSystem& sys, std::vector<double> a,
                          std::vector<double> x0, double T = 1.0);

/// Rendezvous battery: single, double, scalar +-1 and the 3-state system.
std::vector<FiniteTimeProblem> rendezvous_battery();

WeightVector random_weights(std::mt19937& rng, int N);
Matrix random_matrix(std::mt19937& rng, int rows, int cols, double scale = 1.0);
/// Random symmetric positive definite matrix with eigenvalues in [0.5, 2.5].
Matrix random_spd(std::mt19937& rng, int n);

/// int_0^h e^{F s} G G^T e^{F^T s} ds via a block matrix exponential.
Matrix van_loan_integral(const Matrix& F, const Matrix& G, double h);
/// Output Gramian W(t,T) through the block-exponential route.
Matrix van_loan_output_gramian(const LtiSystem& sys, double horizon);
/// G(t,T) through the block-exponential route.
Matrix van_loan_related_gramian(const LtiSystem& sys, double horizon);

/// Independent integrator: classical RK4 on the stacked closed loop with
/// static feedback u = -K(t) x, step h. Returns states at each step.
std::vector<Vector> rk4_reference(const Matrix& Abig, const Matrix& Bbig,
                                  const std::function<Matrix(double)>& K,
                                  const Vector& x0, double t0, double t1,
                                  int steps);

}  // namespace optcons::testing
