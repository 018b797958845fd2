#pragma once

#include <optional>

#include "optcons/control_law.hpp"
#include "optcons/network.hpp"
#include "optcons/numkit.hpp"
#include "optcons/weights.hpp"

namespace optcons {

/// Rendezvous problem: drive all outputs to a common value at time T while
/// minimizing int_{t0}^{T} sum_i a_i |u_i|^2 dt.
struct FiniteTimeProblem {
  AgentNetwork agents;
  WeightVector weights;
  Vector x0;
  double t0 = 0.0;
  double T = 1.0;
  /// Width of the terminal window handled open-loop; defaults to
  /// 1e-3 (T - t0).
  std::optional<double> eps_switch;
  QuadratureConfig quad;

  double switch_time() const;
  double horizon() const { return T - t0; }
  /// Checks shapes, the horizon, and output controllability of every
  /// distinct agent over [t0, T].
  void validate() const;
};

/// u(t) = -(L(a) (x) B^T e^{A^T(T-t)} C^T W(t0,T)^{-1} C e^{A(T-t0)}) x0
Vector open_loop_control(const FiniteTimeProblem& prob, double t);

/// K(t) = L(a) (x) B^T e^{A^T(T-t)} C^T W(t,T)^{-1} C e^{A(T-t)}, u = -K x.
Matrix state_feedback_gain(const FiniteTimeProblem& prob, double t);

/// K_y(t) = L(a) (x) B^T C^T G(t,T)^{-1}, u = -K_y y. Requires ker(C) to be
/// A-invariant.
Matrix output_feedback_gain(const FiniteTimeProblem& prob, double t);

/// a-weighted average of C x_i(t0); valid when every x_i(t0) lies in ker(A).
Vector predict_consensus_point(const FiniteTimeProblem& prob);

struct HeterogeneousSolution {
  Vector alpha_star;  // common output value at T
  ControlLaw law;     // open-loop per-agent minimum-energy steering
};

HeterogeneousSolution heterogeneous_controller(const FiniteTimeProblem& prob);

/// Closed-form optimal cost of the rendezvous problem.
double optimal_cost(const FiniteTimeProblem& prob);

/// Builds a finite-time law. Feedback kinds switch to the open-loop law
/// recomputed from the captured state at `prob.switch_time()`.
ControlLaw make_control_law(const FiniteTimeProblem& prob, LawKind kind);

/// Open-loop optimal law for a homogeneous network starting from
/// (t_start, x_start), valid on [t_start, T].
ControlLaw open_loop_law(const LtiSystem& sys, const WeightVector& a,
                         const Vector& x_start, double t_start, double T,
                         const QuadratureConfig& cfg = {});

}  // namespace optcons
