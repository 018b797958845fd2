#pragma once

#include "optcons/control_law.hpp"
#include "optcons/lti_system.hpp"
#include "optcons/numkit.hpp"
#include "optcons/weights.hpp"

namespace optcons {

/// Stabilizing solution of A^T P + P A - P B B^T P = 0.
struct RiccatiSolution {
  Matrix P0;
  double residual = 0.0;  // |A^T P0 + P0 A - P0 B B^T P0|_F
  ComplexVector closed_loop_spectrum;  // eig(A - B B^T P0)
};

/// Q <= 0 with A Q + Q A^T = -Q C^T C Q and A + Q C^T C Hurwitz.
struct ObserverDesign {
  Matrix Q;
  double residual = 0.0;  // |A Q + Q A^T + Q C^T C Q|_F
  ComplexVector error_spectrum;  // eig(A + Q C^T C)
};

/// Relative margin used to reject eigenvalues of A on the imaginary axis:
/// |Re lambda| <= kImaginaryAxisTol * |A|.
inline constexpr double kImaginaryAxisTol = 1e-6;

bool is_stabilizable(const Matrix& A, const Matrix& B);
bool is_detectable(const Matrix& A, const Matrix& C);

/// Solves F^T X + X F + R = 0 (dense Kronecker formulation).
Matrix solve_lyapunov(const Matrix& F, const Matrix& R);

/// Ordered complex Schur decomposition of the Hamiltonian
/// [[A, -B B^T], [0, -A^T]] followed by one Newton (Kleinman) refinement.
RiccatiSolution solve_are(const Matrix& A, const Matrix& B);

/// P(t,T) = e^{A^T(T-t)} C^T W(t,T)^{-1} C e^{A(T-t)}, the finite-horizon
/// Riccati solution.
Matrix solve_dre(const LtiSystem& sys, double t, double T,
                 const QuadratureConfig& cfg = {});

/// K = L(a) (x) B^T P0, u = -K x.
Matrix asymptotic_state_gain(const WeightVector& a, const LtiSystem& sys,
                             const RiccatiSolution& sol);

/// G0 = (C C^T)^{-1} C P0 C^T (C C^T)^{-1}.
Matrix output_riccati_matrix(const LtiSystem& sys, const RiccatiSolution& sol);

/// K_y = L(a) (x) B^T C^T G0, u = -K_y y. Requires ker(C) A-invariant and
/// (A, C) detectable, which makes C^T G0 C = P0.
Matrix asymptotic_output_gain(const WeightVector& a, const LtiSystem& sys,
                              const RiccatiSolution& sol);

/// Dual Riccati solve: Q = -S with A S + S A^T - S C^T C S = 0 stabilizing.
ObserverDesign solve_observer_are(const Matrix& A, const Matrix& C);

/// u_i = -B^T P0 dhat_i with
///   dhat_i' = (A - B B^T P0) dhat_i - Q C^T (r_i - C dhat_i),
///   r_i = (sum a)^{-1} sum_j a_j (y_i - y_j),  dhat_i(0) = 0.
ControlLaw observer_consensus_law(const WeightVector& a, const LtiSystem& sys,
                                  const RiccatiSolution& sol,
                                  const ObserverDesign& obs);

/// AsymptoticState, AsymptoticOutput or ObserverBased.
ControlLaw make_asymptotic_law(const LtiSystem& sys, const WeightVector& a,
                               LawKind kind);

}  // namespace optcons
