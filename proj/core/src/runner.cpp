#include "optcons/runner.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "optcons/asymptotic.hpp"
#include "optcons/errors.hpp"
#include "optcons/oracle.hpp"
#include "optcons/topology.hpp"

namespace optcons {

namespace {

std::string format(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string format(const Vector& v) {
  std::vector<double> values(v.data(), v.data() + v.size());
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i)
    os << (i ? ", " : "") << format(values[i]);
  return os.str();
}

double output_spread(const AgentNetwork& net, const Vector& x) {
  const Vector y = net.outputs(x);
  double spread = 0.0;
  for (int i = 0; i < net.size(); ++i)
    for (int j = i + 1; j < net.size(); ++j)
      spread = std::max(spread,
                        (net.agent_output(y, i) - net.agent_output(y, j)).norm());
  return spread;
}

Vector weighted_output(const AgentNetwork& net, const WeightVector& a,
                       const Vector& y) {
  Vector avg = Vector::Zero(net.output_dim());
  for (int i = 0; i < net.size(); ++i) avg += a[i] * net.agent_output(y, i);
  return avg / a.total();
}

void write_artifacts(const Scenario& s, const RunOptions& opts,
                     const Trajectory* traj, const Report& report) {
  if (!opts.write_artifacts) return;
  std::filesystem::create_directories(opts.out_dir);
  if (traj) {
    std::ofstream csv(opts.out_dir / s.trajectory_path);
    if (!csv) fail(ErrorCode::InvalidArgument, "cannot write " + s.trajectory_path);
    write_trajectory_csv(csv, *traj, s.network());
  }
  std::ofstream rep(opts.out_dir / s.report_path);
  if (!rep) fail(ErrorCode::InvalidArgument, "cannot write " + s.report_path);
  report.write(rep);
}

void add_header(Report& r, const Scenario& s) {
  r.add("scenario", s.name);
  r.add("controller", std::string(to_string(s.controller)));
  r.add("agents", static_cast<long long>(s.systems.size()));
  r.add("homogeneous", s.network().homogeneous());
  r.add("t0", s.t0);
  if (s.finite_time()) r.add("T", *s.T);
  else r.add("t_end", *s.t_end);
}

void add_certification(Report& r, const CertificationReport& cert) {
  r.add("certify_law_cost", cert.law_cost);
  r.add("certify_closed_form_cost", cert.closed_form_cost);
  r.add("certify_consensus_error", cert.law_consensus_error);
  r.add("certify_rendezvous_ok", cert.rendezvous_ok);
  if (!cert.rows.empty()) {
    r.add("certify_K_max", static_cast<long long>(cert.rows.back().K));
    r.add("certify_oracle_cost", cert.rows.back().oracle_cost);
    r.add("certify_rel_gap", cert.rows.back().rel_gap);
  }
  r.add("certify_gap_tol", cert.gap_tol);
  r.add("certify_passed", cert.passed);
  std::ostringstream table;
  write_certification_table(table, cert);
  r.append_block(table.str());
}

ControlLaw build_law(const Scenario& s) {
  if (s.finite_time()) return make_control_law(s.problem(), s.controller);
  return make_asymptotic_law(s.systems.front(), s.weight_vector(), s.controller);
}

}  // namespace

void Report::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}
void Report::add(const std::string& key, double value) { add(key, format(value)); }
void Report::add(const std::string& key, long long value) {
  add(key, std::to_string(value));
}
void Report::add(const std::string& key, bool value) {
  add(key, std::string(value ? "true" : "false"));
}
void Report::add(const std::string& key, const std::vector<double>& values) {
  add(key, format(Eigen::Map<const Vector>(values.data(),
                                           static_cast<Eigen::Index>(values.size()))));
}

std::optional<std::string> Report::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

void Report::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  for (const auto& b : blocks_) out << '\n' << b;
}

Scenario apply_overrides(Scenario s, const RunOptions& opts) {
  if (opts.step) s.sim.step = *opts.step;
  if (opts.method) s.sim.method = *opts.method;
  if (opts.eps_switch) s.eps_switch = *opts.eps_switch;
  if (!(opts.tol_consensus > 0.0))
    fail(ErrorCode::ValidationError, "--tol-consensus must be positive");
  validate_scenario(s);
  return s;
}

Report run_scenario(const Scenario& s, const RunOptions& opts) {
  Report r;
  add_header(r, s);
  const AgentNetwork net = s.network();
  const WeightVector a = s.weight_vector();
  const Vector x0 = s.stacked_initial_state();
  const ControlLaw law = build_law(s);
  const double t_end = s.end_time();

  const Trajectory traj = simulate(net, a, x0, s.t0, t_end, law, s.sim);
  const double spread = output_spread(net, x0);
  r.add("integrator", std::string(s.sim.method == Integrator::RK4 ? "rk4" : "rk45"));
  r.add("samples", static_cast<long long>(traj.size()));
  r.add("initial_spread", spread);
  r.add("consensus_tol", opts.tol_consensus);

  if (s.finite_time()) {
    const FiniteTimeProblem prob = s.problem();
    const double err = consensus_error(traj, net.size(), t_end);
    r.add("switch_time", prob.switch_time());
    r.add("consensus_error_T", err);
    r.add("relative_consensus_error_T", spread > 0.0 ? err / spread : err);
    r.add("consensus_point", format(weighted_output(net, a, traj.outputs.back())));
    if (s.controller == LawKind::HeterogeneousFT)
      r.add("alpha_star", format(heterogeneous_controller(prob).alpha_star));
    else {
      try {
        r.add("consensus_point_predicted", format(predict_consensus_point(prob)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InitialStateNotInKernel) throw;
      }
    }
    r.add("total_cost", traj.cost_integral.back());
    r.add("closed_form_cost", optimal_cost(prob));
    r.ok = err <= opts.tol_consensus * std::max(spread, 1.0);
  } else {
    // Decay curve on 20 evenly spaced samples.
    std::vector<double> times, errors;
    const int samples = 20;
    for (int k = 0; k <= samples; ++k) {
      const double t = s.t0 + (t_end - s.t0) * k / samples;
      times.push_back(t);
      errors.push_back(consensus_error(traj, net.size(), t));
    }
    // Transient: first fifth of the horizon.
    bool monotone = true;
    for (int k = samples / 5 + 1; k <= samples; ++k)
      if (errors[k] > errors[k - 1] * (1.0 + 1e-9) + 1e-300) monotone = false;
    const double final_err = errors.back();
    r.add("decay_times", times);
    r.add("decay_errors", errors);
    r.add("decay_monotone_after_transient", monotone);
    r.add("final_consensus_error", final_err);
    r.add("relative_final_consensus_error", spread > 0.0 ? final_err / spread : final_err);
    r.add("total_cost", traj.cost_integral.back());
    if (s.controller != LawKind::ObserverBased) {
      const RiccatiSolution sol = solve_are(s.systems.front().A(), s.systems.front().B());
      r.add("riccati_residual", sol.residual);
    } else {
      const ObserverDesign obs =
          solve_observer_are(s.systems.front().A(), s.systems.front().C());
      r.add("observer_residual", obs.residual);
      double max_re = -std::numeric_limits<double>::infinity();
      for (const auto& lambda : obs.error_spectrum)
        max_re = std::max(max_re, lambda.real());
      r.add("observer_max_real_eigenvalue", max_re);
    }
    r.ok = final_err <= opts.tol_consensus * std::max(spread, 1.0);
  }

  if (s.finite_time() && !s.certify_K.empty()) {
    const CertificationReport cert =
        certify(s.problem(), law, s.certify_K, s.sim, 0.01, opts.tol_consensus);
    add_certification(r, cert);
    r.ok = r.ok && cert.passed;
  }
  r.add("trajectory_csv", (opts.out_dir / s.trajectory_path).string());
  r.add("status", std::string(r.ok ? "ok" : "failed"));
  write_artifacts(s, opts, &traj, r);
  return r;
}

Report certify_scenario(const Scenario& s, const RunOptions& opts) {
  if (!s.finite_time())
    fail(ErrorCode::ValidationError, "certification applies to finite-time controllers");
  Report r;
  add_header(r, s);
  const std::vector<int> Ks =
      s.certify_K.empty() ? std::vector<int>{64, 128, 256} : s.certify_K;
  const CertificationReport cert =
      certify(s.problem(), build_law(s), Ks, s.sim, 0.01, opts.tol_consensus);
  add_certification(r, cert);
  r.ok = cert.passed;
  r.add("status", std::string(r.ok ? "ok" : "failed"));
  write_artifacts(s, opts, nullptr, r);
  return r;
}

Report compare_topology_scenario(const Scenario& s, const RunOptions& opts) {
  if (!s.topology)
    fail(ErrorCode::ValidationError, "scenario has no [topology] section");
  Report r;
  add_header(r, s);
  if (!s.topology->is_connected())
    r.add("warning", std::string(to_string(ErrorCode::DisconnectedGraph)));
  const TopologyComparison cmp =
      compare_topology(s.problem(), *s.topology, opts.tol_consensus, s.sim);
  r.add("initial_spread", cmp.initial_spread);
  r.add("optimal_cost", cmp.optimal_cost);
  r.add("closed_form_cost", cmp.closed_form_cost);
  r.add("optimal_consensus_error", cmp.optimal_consensus_error);
  r.add("restricted_gain_multiplier", cmp.gain_multiplier);
  r.add("restricted_bisection_steps", static_cast<long long>(cmp.bisection_steps));
  r.add("restricted_cost", cmp.restricted_cost);
  r.add("restricted_consensus_error", cmp.restricted_consensus_error);
  r.add("cost_margin", cmp.margin());
  r.ok = cmp.margin() > opts.tol_consensus &&
         cmp.restricted_consensus_error <= opts.tol_consensus * cmp.initial_spread;
  r.add("status", std::string(r.ok ? "ok" : "failed"));
  write_artifacts(s, opts, nullptr, r);
  return r;
}

Report check_scenario(const Scenario& s) {
  Report r;
  add_header(r, s);
  r.add("certify", !s.certify_K.empty());
  r.add("topology", s.topology.has_value());
  r.add("status", std::string("valid"));
  return r;
}

}  // namespace optcons
