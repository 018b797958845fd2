#pragma once

#include "optcons/lti_system.hpp"
#include "optcons/numkit.hpp"

namespace optcons {

struct GramianResult {
  Matrix value;  // p x p, symmetric PSD
  double t = 0.0;
  double T = 0.0;
  /// lambda_max / lambda_min; infinity when singular.
  double condition_estimate = 0.0;
};

/// W(t,T) = int_t^T C e^{A(T-s)} B B^T e^{A^T(T-s)} C^T ds
GramianResult output_gramian(const LtiSystem& sys, double t, double T,
                             const QuadratureConfig& cfg = {});

/// G(t,T) = int_0^{T-t} C e^{-Ar} B B^T e^{-A^T r} C^T dr
GramianResult related_gramian(const LtiSystem& sys, double t, double T,
                              const QuadratureConfig& cfg = {});

inline constexpr double kControllabilityTol = 1e-9;
inline constexpr double kInvarianceTol = 1e-9;

/// lambda_min(W(0, horizon)) > tol * lambda_max(W(0, horizon)).
bool is_output_controllable(const LtiSystem& sys, double horizon,
                            double tol = kControllabilityTol,
                            const QuadratureConfig& cfg = {});

/// |C A K| <= tol |A| |C| with K an orthonormal basis of ker(C).
bool is_kernel_A_invariant(const LtiSystem& sys, double tol = kInvarianceTol);

/// |P^T C^T (C P W P^T C^T)^{-1} C P - C^T (C W C^T)^{-1} C|_F.
double projection_identity_residual(const Matrix& C, const Matrix& P,
                                    const Matrix& W);

/// P(t,T) = e^{A^T(T-t)} C^T W(t,T)^{-1} C e^{A(T-t)}; throws
/// NotOutputControllable when W(t,T) is not positive definite.
Matrix gramian_riccati_matrix(const LtiSystem& sys, double t, double T,
                              const QuadratureConfig& cfg = {});

}  // namespace optcons
