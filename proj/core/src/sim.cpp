#include "optcons/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "optcons/errors.hpp"

namespace optcons {

std::size_t Trajectory::nearest(double t) const {
  if (times.empty()) fail(ErrorCode::InvalidArgument, "empty trajectory");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

namespace {

// Closed loop on the augmented state z = [x; internal].
class ClosedLoop {
 public:
  ClosedLoop(const AgentNetwork& agents, ControlLaw law)
      : agents_(agents), law_(std::move(law)) {}

  const ControlLaw& law() const { return law_; }
  void replace_law(ControlLaw law) { law_ = std::move(law); }

  int plant_dim() const { return agents_.total_states(); }

  Vector rate(double t, const Vector& z) const {
    const int nx = plant_dim();
    const Vector x = z.head(nx);
    const Vector internal = z.tail(z.size() - nx);
    const Vector y = agents_.outputs(x);
    const Vector u = law_.control(t, x, y, internal);
    Vector dz(z.size());
    dz.head(nx) = agents_.dynamics(x, u);
    if (internal.size() > 0)
      dz.tail(internal.size()) = law_.internal_rate(t, y, internal);
    return dz;
  }

 private:
  const AgentNetwork& agents_;
  ControlLaw law_;
};

double weighted_energy(const Vector& u, const AgentNetwork& agents,
                       const WeightVector& a) {
  double e = 0.0;
  for (int i = 0; i < agents.size(); ++i)
    e += a[i] * agents.agent_input(u, i).squaredNorm();
  return e;
}

void check_finite(const Vector& z, double t) {
  if (!z.allFinite())
    fail(ErrorCode::NonFiniteState,
         "state became non-finite at t = " + std::to_string(t));
}

class Recorder {
 public:
  Recorder(const AgentNetwork& agents, const WeightVector& a, Trajectory& traj)
      : agents_(agents), a_(a), traj_(traj) {}

  void record(double t, const Vector& z, const ControlLaw& law) {
    const int nx = agents_.total_states();
    const Vector x = z.head(nx);
    const Vector internal = z.tail(z.size() - nx);
    const Vector y = agents_.outputs(x);
    const Vector u = law.control(t, x, y, internal);
    const double energy = weighted_energy(u, agents_, a_);
    double cum = 0.0;
    if (!traj_.times.empty())
      cum = traj_.cost_integral.back() +
            0.5 * (t - traj_.times.back()) * (energy + last_energy_);
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    traj_.outputs.push_back(y);
    traj_.controls.push_back(u);
    if (internal.size() > 0) traj_.observer_states.push_back(internal);
    traj_.cost_integral.push_back(cum);
    prev_energy_ = last_energy_;
    last_energy_ = energy;
  }

  // Replaces the control of the newest sample (used at a law switch).
  void rerecord_last(const Vector& z, const ControlLaw& law) {
    const int nx = agents_.total_states();
    const Vector x = z.head(nx);
    const Vector u = law.control(traj_.times.back(), x, agents_.outputs(x),
                                 z.tail(z.size() - nx));
    const double energy = weighted_energy(u, agents_, a_);
    const std::size_t k = traj_.size() - 1;
    traj_.controls.back() = u;
    if (k > 0)
      traj_.cost_integral[k] = traj_.cost_integral[k - 1] +
                               0.5 * (traj_.times[k] - traj_.times[k - 1]) *
                                   (energy + prev_energy_);
    last_energy_ = energy;
  }

 private:
  const AgentNetwork& agents_;
  const WeightVector& a_;
  Trajectory& traj_;
  double last_energy_ = 0.0;
  double prev_energy_ = 0.0;
};

Vector rk4_step(const ClosedLoop& sys, double t, const Vector& z, double h) {
  const Vector k1 = sys.rate(t, z);
  const Vector k2 = sys.rate(t + 0.5 * h, z + 0.5 * h * k1);
  const Vector k3 = sys.rate(t + 0.5 * h, z + 0.5 * h * k2);
  const Vector k4 = sys.rate(t + h, z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void integrate_rk4(const ClosedLoop& sys, double t0, double t1, Vector& z,
                   double step, Recorder& rec) {
  const double len = t1 - t0;
  if (len <= 0.0) return;
  const int steps = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
  const double h = len / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    z = rk4_step(sys, t, z, h);
    const double t_next = (k + 1 == steps) ? t1 : t0 + (k + 1) * h;
    check_finite(z, t_next);
    rec.record(t_next, z, sys.law());
  }
}

// Feedback gains grow like 1/(T - t); within step / kGrading of the horizon
// the RK4 step is kept below kGrading * (T - t), but never below
// kGrading * step. Every law with a horizon gets the same grid up to t_s.
constexpr double kGrading = 0.05;

void integrate_rk4_graded(const ClosedLoop& sys, double t0, double t1,
                          Vector& z, double step, double horizon,
                          Recorder& rec) {
  const double knee = std::clamp(horizon - step / kGrading, t0, t1);
  integrate_rk4(sys, t0, knee, z, step, rec);
  double t = knee;
  while (t < t1) {
    double h = std::max(std::min(step, kGrading * (horizon - t)), kGrading * step);
    if (t + 1.5 * h >= t1) h = t1 - t;
    z = rk4_step(sys, t, z, h);
    t = (h == t1 - t) ? t1 : t + h;
    check_finite(z, t);
    rec.record(t, z, sys.law());
  }
}

// Dormand-Prince 5(4) with standard step-size control.
void integrate_rk45(const ClosedLoop& sys, double t0, double t1, Vector& z,
                    const SimOptions& opts, double initial_step,
                    Recorder& rec) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  double h = std::min(initial_step, t1 - t0);
  const double h_min = 1e-14 * std::max(1.0, std::abs(t1));
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    const Vector k1 = sys.rate(t, z);
    const Vector k2 = sys.rate(t + c2 * h, z + h * (a21 * k1));
    const Vector k3 = sys.rate(t + c3 * h, z + h * (a31 * k1 + a32 * k2));
    const Vector k4 =
        sys.rate(t + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = sys.rate(
        t + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = sys.rate(
        t + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector z_new =
        z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = sys.rate(t + h, z_new);
    const Vector err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double sc = opts.rk45_abs_tol +
                        opts.rk45_rel_tol *
                            std::max(std::abs(z(i)), std::abs(z_new(i)));
      err_norm = std::max(err_norm, std::abs(err(i)) / sc);
    }
    if (!std::isfinite(err_norm)) check_finite(z_new, t + h);

    if (err_norm <= 1.0) {
      t = (t + h >= t1) ? t1 : t + h;
      z = z_new;
      check_finite(z, t);
      rec.record(t, z, sys.law());
    }
    const double factor =
        err_norm == 0.0 ? 5.0
                        : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < h_min && t < t1)
      fail(ErrorCode::NonFiniteState,
           "RK45 step size underflow at t = " + std::to_string(t));
  }
}

}  // namespace

Trajectory simulate(const AgentNetwork& agents, const WeightVector& a,
                    const Vector& x0, double t0, double t_end,
                    const ControlLaw& law, const SimOptions& opts) {
  if (!(t_end > t0))
    fail(ErrorCode::DegenerateInterval, "simulation requires t_end > t0");
  if (x0.size() != agents.total_states())
    fail(ErrorCode::DimensionMismatch, "initial state has wrong length");
  if (a.size() != agents.size())
    fail(ErrorCode::DimensionMismatch, "weight count differs from agent count");
  if (opts.step < 0.0)
    fail(ErrorCode::InvalidArgument, "integration step must be positive");
  const double step = opts.step > 0.0 ? opts.step : (t_end - t0) / 2000.0;

  ClosedLoop loop(agents, law);
  Vector z = Vector::Zero(agents.total_states() + law.internal_dim());
  z.head(agents.total_states()) = x0;

  Trajectory traj;
  Recorder rec(agents, a, traj);

  const auto ts = law.switch_time();
  const bool switches = ts && *ts > t0 && *ts < t_end;
  std::vector<double> breaks{t0};
  if (switches) breaks.push_back(*ts);
  breaks.push_back(t_end);

  rec.record(t0, z, loop.law());

  for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
    const double a0 = breaks[seg];
    const double a1 = breaks[seg + 1];
    const auto horizon = loop.law().horizon_end();
    if (opts.method == Integrator::RK4 && horizon && a1 <= *horizon) {
      integrate_rk4_graded(loop, a0, a1, z, step, *horizon, rec);
    } else if (opts.method == Integrator::RK4) {
      integrate_rk4(loop, a0, a1, z, step, rec);
    } else {
      integrate_rk45(loop, a0, a1, z, opts, step, rec);
    }
    if (switches && a1 == *ts) {
      const Vector x = z.head(agents.total_states());
      loop.replace_law(loop.law().after_switch(*ts, x, agents.outputs(x)));
      rec.rerecord_last(z, loop.law());
    }
  }
  return traj;
}

Trajectory simulate(const FiniteTimeProblem& prob, const ControlLaw& law,
                    const SimOptions& opts) {
  return simulate(prob.agents, prob.weights, prob.x0, prob.t0, prob.T, law,
                  opts);
}

double accumulate_cost(const Trajectory& traj, const AgentNetwork& agents,
                       const WeightVector& a) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double e0 = weighted_energy(traj.controls[k], agents, a);
    const double e1 = weighted_energy(traj.controls[k + 1], agents, a);
    total += 0.5 * (traj.times[k + 1] - traj.times[k]) * (e0 + e1);
  }
  return total;
}

double consensus_error(const Trajectory& traj, int agents, double t) {
  const Vector& y = traj.outputs[traj.nearest(t)];
  const Eigen::Index p = y.size() / agents;
  double worst = 0.0;
  for (int i = 0; i < agents; ++i)
    for (int j = i + 1; j < agents; ++j)
      worst = std::max(worst,
                       (y.segment(i * p, p) - y.segment(j * p, p)).norm());
  return worst;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const AgentNetwork& agents) {
  const int n = agents.max_state_dim();
  const int p = agents.output_dim();
  const int m = agents.max_input_dim();
  out << "t,agent";
  for (int k = 1; k <= n; ++k) out << ",state_" << k;
  for (int k = 1; k <= p; ++k) out << ",output_" << k;
  for (int k = 1; k <= m; ++k) out << ",control_" << k;
  out << ",cost_cum\n";

  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(12);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    for (int i = 0; i < agents.size(); ++i) {
      const LtiSystem& sys = agents.agent(i);
      out << traj.times[s] << ',' << (i + 1);
      const Vector xi = agents.agent_state(traj.states[s], i);
      for (int k = 0; k < n; ++k) {
        out << ',';
        if (k < sys.n()) out << xi(k);
      }
      const Vector yi = agents.agent_output(traj.outputs[s], i);
      for (int k = 0; k < p; ++k) out << ',' << yi(k);
      const Vector ui = agents.agent_input(traj.controls[s], i);
      for (int k = 0; k < m; ++k) {
        out << ',';
        if (k < sys.m()) out << ui(k);
      }
      out << ',' << traj.cost_integral[s] << '\n';
    }
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace optcons
