#pragma once

#include <iosfwd>
#include <vector>

#include "optcons/control_law.hpp"
#include "optcons/finite_time.hpp"
#include "optcons/network.hpp"
#include "optcons/weights.hpp"

namespace optcons {

/// Time-gridded record of a closed-loop run.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> outputs;
  std::vector<Vector> controls;
  std::vector<Vector> observer_states;  // empty for static laws
  std::vector<double> cost_integral;    // cumulative weighted energy

  std::size_t size() const { return times.size(); }
  /// Index of the sample nearest to t.
  std::size_t nearest(double t) const;
};

enum class Integrator { RK4, RK45 };

struct SimOptions {
  Integrator method = Integrator::RK4;
  /// Fixed RK4 step (or RK45 initial step); 0 selects (t_end - t0) / 2000.
  double step = 0.0;
  double rk45_rel_tol = 1e-10;
  double rk45_abs_tol = 1e-12;
};

/// Integrates the stacked closed loop on [t0, t_end]. A law with a switch
/// time inside the interval is replaced at that instant by
/// law.after_switch(ts, x(ts), y(ts)); the grid contains ts and t_end.
Trajectory simulate(const AgentNetwork& agents, const WeightVector& a,
                    const Vector& x0, double t0, double t_end,
                    const ControlLaw& law, const SimOptions& opts = {});

/// Finite-time run over [prob.t0, prob.T].
Trajectory simulate(const FiniteTimeProblem& prob, const ControlLaw& law,
                    const SimOptions& opts = {});

/// Trapezoidal integral of sum_i a_i |u_i|^2 over the trajectory grid.
double accumulate_cost(const Trajectory& traj, const AgentNetwork& agents,
                       const WeightVector& a);

/// max_{i<j} |y_i(t) - y_j(t)| at the sample nearest to t.
double consensus_error(const Trajectory& traj, int agents, double t);

/// `t,agent,state_1..state_n,output_1..output_p,control_1..control_m,cost_cum`
/// one row per (sample, agent), 12 significant digits. Agents with fewer
/// states or inputs than the widest agent leave the surplus cells empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const AgentNetwork& agents);

}  // namespace optcons
