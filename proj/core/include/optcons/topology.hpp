#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "optcons/control_law.hpp"
#include "optcons/errors.hpp"
#include "optcons/finite_time.hpp"
#include "optcons/sim.hpp"

namespace optcons {

struct Edge {
  int i = 0;  // zero-based agent indices
  int j = 0;
  double weight = 1.0;
};

/// Undirected weighted communication graph.
class TopologyGraph {
 public:
  TopologyGraph(int agents, std::vector<Edge> edges);

  static TopologyGraph complete(int agents, double weight = 1.0);
  static TopologyGraph ring(int agents, double weight = 1.0);

  int size() const { return agents_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Weighted degree-minus-adjacency matrix.
  Matrix laplacian() const;
  bool is_connected() const;

 private:
  int agents_;
  std::vector<Edge> edges_;
};

using GainSchedule = std::function<Matrix(double)>;

struct RestrictedLaw {
  ControlLaw law;
  /// DisconnectedGraph when the graph has more than one component; the law
  /// is still usable.
  std::optional<ErrorCode> warning;
};

/// Terminal segment [switch_time, T] of a restricted law. At the switch each
/// agent captures its neighbours' outputs and applies the minimum-energy
/// open-loop correction driven by the graph Laplacian instead of L(a).
struct TerminalSegment {
  LtiSystem system;
  double switch_time = 0.0;
  double T = 0.0;
  QuadratureConfig quad;
};

TerminalSegment terminal_segment(const FiniteTimeProblem& prob);

/// u = -(Lap(graph) (x) multiplier * base_gain(t)) y, followed by the
/// open-loop terminal segment when one is given. With Lap = L(a) and
/// multiplier 1 this is the optimal output law.
RestrictedLaw topology_restricted_controller(
    const TopologyGraph& graph, GainSchedule base_gain, double multiplier = 1.0,
    std::optional<TerminalSegment> terminal = std::nullopt);

/// B^T C^T G(t,T)^{-1}, the per-edge gain of the optimal output law.
GainSchedule output_gain_schedule(const FiniteTimeProblem& prob);

struct TopologyComparison {
  double optimal_cost = 0.0;        // simulated optimal law
  double closed_form_cost = 0.0;    // analytic optimum
  double optimal_consensus_error = 0.0;
  double restricted_cost = 0.0;
  double restricted_consensus_error = 0.0;
  double gain_multiplier = 0.0;
  double initial_spread = 0.0;
  int bisection_steps = 0;

  double margin() const { return restricted_cost - optimal_cost; }
};

/// Tunes the scalar multiplier of the topology-restricted law by bisection
/// down from 1 (or up, if 1 misses) to the boundary of consensus_error(T) <=
/// tol * spread, then compares its cost against the optimal output law.
TopologyComparison compare_topology(const FiniteTimeProblem& prob,
                                    const TopologyGraph& graph,
                                    double consensus_tol = 1e-6,
                                    const SimOptions& opts = {});

}  // namespace optcons
