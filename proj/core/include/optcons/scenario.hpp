#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optcons/control_law.hpp"
#include "optcons/finite_time.hpp"
#include "optcons/network.hpp"
#include "optcons/sim.hpp"
#include "optcons/topology.hpp"

namespace optcons {

/// Experiment description loaded from a scenario file.
///
/// Grammar (one `key = value` per line, `#` starts a comment):
///
///   [scenario]    name, controller, weights, t0, T | t_end, eps_switch
///   [system]      A, B, C shared by all agents, or
///   [agent.<i>]   A, B, C for agent i (heterogeneous)
///   [initial]     x<i> = comma-separated initial state of agent i
///   [integrator]  method = rk4 | rk45, step
///   [output]      trajectory, report (paths relative to --out-dir)
///   [certify]     K = comma-separated grid sizes
///   [topology]    edges = 1-2, 2-3:0.5, ...  (1-based, optional :weight)
///
/// Matrices are written row by row: `A = [0, 1; 0, 0]`.
struct Scenario {
  std::string name;
  std::filesystem::path source;
  LawKind controller = LawKind::StateFeedbackFT;
  std::vector<LtiSystem> systems;  // one entry per agent
  Vector weights;
  std::vector<Vector> initial_states;
  double t0 = 0.0;
  std::optional<double> T;      // finite-time scenarios
  std::optional<double> t_end;  // asymptotic scenarios
  std::optional<double> eps_switch;
  SimOptions sim;
  std::string trajectory_path;
  std::string report_path;
  std::vector<int> certify_K;
  std::optional<TopologyGraph> topology;

  bool finite_time() const { return is_finite_time(controller); }
  AgentNetwork network() const;
  WeightVector weight_vector() const { return WeightVector(weights); }
  Vector stacked_initial_state() const;
  /// Finite-time problem; requires T.
  FiniteTimeProblem problem() const;
  double end_time() const;
};

/// Parses without semantic validation. Throws ParseError naming the line
/// and field.
Scenario parse_scenario(std::string_view text, const std::string& origin);

/// Checks every precondition the selected controller needs (controllable
/// agents, invariant kernel for output feedback, Riccati hypotheses, ...).
/// Throws ValidationError naming the violated condition.
void validate_scenario(const Scenario& s);

/// parse_scenario + validate_scenario on a file.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace optcons
