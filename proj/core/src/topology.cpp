#include "optcons/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"
#include "gain_cache.hpp"

namespace optcons {

TopologyGraph::TopologyGraph(int agents, std::vector<Edge> edges)
    : agents_(agents), edges_(std::move(edges)) {
  if (agents < 2) fail(ErrorCode::InvalidArgument, "graph needs >= 2 agents");
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= agents || e.j >= agents)
      fail(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (e.i == e.j) fail(ErrorCode::InvalidArgument, "self-loops are not allowed");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      fail(ErrorCode::InvalidArgument, "edge weights must be positive");
  }
}

TopologyGraph TopologyGraph::complete(int agents, double weight) {
  std::vector<Edge> edges;
  for (int i = 0; i < agents; ++i)
    for (int j = i + 1; j < agents; ++j) edges.push_back({i, j, weight});
  return TopologyGraph(agents, std::move(edges));
}

TopologyGraph TopologyGraph::ring(int agents, double weight) {
  std::vector<Edge> edges;
  for (int i = 0; i < agents; ++i) edges.push_back({i, (i + 1) % agents, weight});
  if (agents == 2) edges.pop_back();
  return TopologyGraph(agents, std::move(edges));
}

Matrix TopologyGraph::laplacian() const {
  Matrix L = Matrix::Zero(agents_, agents_);
  for (const Edge& e : edges_) {
    L(e.i, e.j) -= e.weight;
    L(e.j, e.i) -= e.weight;
    L(e.i, e.i) += e.weight;
    L(e.j, e.j) += e.weight;
  }
  return L;
}

bool TopologyGraph::is_connected() const {
  std::vector<int> parent(agents_);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = agents_;
  for (const Edge& e : edges_) {
    const int a = find(e.i);
    const int b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

namespace {

// Applies y -> Lap (x) I to stacked per-agent blocks of length p.
Vector laplacian_apply(const Matrix& laplacian, const Vector& y, Eigen::Index p) {
  const Eigen::Index N = laplacian.rows();
  Vector out = Vector::Zero(N * p);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      if (laplacian(i, j) != 0.0)
        out.segment(i * p, p) += laplacian(i, j) * y.segment(j * p, p);
  return out;
}

// u_i(t) = -c B^T e^{A^T(T-t)} C^T W(ts,T)^{-1} sum_j Lap_ij C e^{A(T-ts)} x_j(ts)
// with x_j(ts) recovered from y_j(ts) (ker C is A-invariant).
class RestrictedTailImpl final : public LawImpl {
 public:
  RestrictedTailImpl(const Matrix& laplacian, double multiplier,
                     const TerminalSegment& seg, const Vector& y)
      : sys_(seg.system), T_(seg.T) {
    const LtiSystem& s = sys_;
    const Eigen::Index N = laplacian.rows();
    const Matrix pinv =
        s.C().transpose() * (s.C() * s.C().transpose()).inverse();
    const Matrix CeA = s.C() * mat_exp(s.A(), seg.T - seg.switch_time) * pinv;
    Vector terminal(N * s.p());
    for (Eigen::Index i = 0; i < N; ++i)
      terminal.segment(i * s.p(), s.p()) = CeA * y.segment(i * s.p(), s.p());
    const Vector rel = laplacian_apply(laplacian, terminal, s.p());
    Eigen::LLT<Matrix> llt(output_gramian(s, seg.switch_time, seg.T, seg.quad).value);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::NotOutputControllable, "W(ts,T) is singular");
    multipliers_.resize(rel.size());
    for (Eigen::Index i = 0; i < N; ++i)
      multipliers_.segment(i * s.p(), s.p()) =
          multiplier * llt.solve(rel.segment(i * s.p(), s.p()));
  }

  Vector control(double t, const Vector&, const Vector&,
                 const Vector&) const override {
    const Matrix M = sys_.B().transpose() *
                     mat_exp(sys_.A().transpose(), T_ - t) *
                     sys_.C().transpose();
    const Eigen::Index N = multipliers_.size() / sys_.p();
    Vector u(N * sys_.m());
    for (Eigen::Index i = 0; i < N; ++i)
      u.segment(i * sys_.m(), sys_.m()) =
          -M * multipliers_.segment(i * sys_.p(), sys_.p());
    return u;
  }

 private:
  LtiSystem sys_;
  double T_;
  Vector multipliers_;
};

class RestrictedImpl final : public LawImpl {
 public:
  RestrictedImpl(Matrix laplacian, GainSchedule gain, double multiplier,
                 std::optional<TerminalSegment> terminal)
      : laplacian_(std::move(laplacian)),
        gain_(std::move(gain)),
        multiplier_(multiplier),
        terminal_(std::move(terminal)) {}

  Vector control(double t, const Vector&, const Vector& y,
                 const Vector&) const override {
    if (terminal_ && t > terminal_->switch_time + 1e-12 * std::abs(terminal_->T))
      fail(ErrorCode::InvalidArgument, "restricted feedback queried past its switch time");
    const Matrix K = multiplier_ * gain_(t);
    const Eigen::Index N = laplacian_.rows();
    const Eigen::Index m = K.rows();
    const Vector rel = laplacian_apply(laplacian_, y, K.cols());
    Vector u(N * m);
    for (Eigen::Index i = 0; i < N; ++i)
      u.segment(i * m, m) = -K * rel.segment(i * K.cols(), K.cols());
    return u;
  }

  std::optional<double> switch_time() const override {
    if (!terminal_) return std::nullopt;
    return terminal_->switch_time;
  }

  std::shared_ptr<const LawImpl> after_switch(double, const Vector&,
                                              const Vector& y) const override {
    return std::make_shared<RestrictedTailImpl>(laplacian_, multiplier_,
                                                *terminal_, y);
  }

 private:
  Matrix laplacian_;
  GainSchedule gain_;
  double multiplier_;
  std::optional<TerminalSegment> terminal_;
};

}  // namespace

TerminalSegment terminal_segment(const FiniteTimeProblem& prob) {
  if (!prob.agents.homogeneous())
    fail(ErrorCode::InvalidArgument, "topology comparison needs identical agents");
  return {prob.agents.agent(0), prob.switch_time(), prob.T, prob.quad};
}

RestrictedLaw topology_restricted_controller(const TopologyGraph& graph,
                                             GainSchedule base_gain,
                                             double multiplier,
                                             std::optional<TerminalSegment> terminal) {
  if (!base_gain) fail(ErrorCode::InvalidArgument, "missing base gain");
  std::optional<double> horizon;
  if (terminal) horizon = terminal->T;
  RestrictedLaw out{
      ControlLaw(LawKind::TopologyRestricted,
                 std::make_shared<RestrictedImpl>(graph.laplacian(),
                                                  std::move(base_gain),
                                                  multiplier, std::move(terminal)),
                 horizon),
      std::nullopt};
  if (!graph.is_connected()) out.warning = ErrorCode::DisconnectedGraph;
  return out;
}

GainSchedule output_gain_schedule(const FiniteTimeProblem& prob) {
  if (!prob.agents.homogeneous())
    fail(ErrorCode::InvalidArgument, "topology comparison needs identical agents");
  const LtiSystem sys = prob.agents.agent(0);
  if (!is_kernel_A_invariant(sys))
    fail(ErrorCode::KernelNotInvariant,
         "output gain schedule requires ker(C) to be A-invariant");
  const double T = prob.T;
  const QuadratureConfig cfg = prob.quad;
  // Shared by every copy, so a bisection reuses the Gramians of earlier runs.
  auto cache = detail::make_gain_cache();
  return [sys, T, cfg, cache](double t) -> Matrix {
    return cache->get(t, [&](double s) -> Matrix {
      const Matrix G = related_gramian(sys, s, T, cfg).value;
      Eigen::LLT<Matrix> llt(G);
      if (llt.info() != Eigen::Success)
        fail(ErrorCode::NotOutputControllable, "G(t,T) is singular");
      const Matrix CB = sys.C() * sys.B();
      return llt.solve(CB).transpose();
    });
  };
}

TopologyComparison compare_topology(const FiniteTimeProblem& prob,
                                    const TopologyGraph& graph,
                                    double consensus_tol,
                                    const SimOptions& opts) {
  if (graph.size() != prob.agents.size())
    fail(ErrorCode::DimensionMismatch, "graph size differs from agent count");
  if (!graph.is_connected())
    fail(ErrorCode::DisconnectedGraph,
         "restricted topology is disconnected; rendezvous is unreachable");

  TopologyComparison out;
  const ControlLaw optimal = make_control_law(prob, LawKind::OutputFeedbackFT);
  const Trajectory opt_traj = simulate(prob, optimal, opts);
  const int N = prob.agents.size();
  out.optimal_cost = accumulate_cost(opt_traj, prob.agents, prob.weights);
  out.closed_form_cost = optimal_cost(prob);
  out.initial_spread = consensus_error(opt_traj, N, prob.t0);
  out.optimal_consensus_error = consensus_error(opt_traj, N, prob.T);

  const GainSchedule base = output_gain_schedule(prob);
  const TerminalSegment tail = terminal_segment(prob);
  const double target = consensus_tol * out.initial_spread;

  struct Eval {
    double error;
    double cost;
  };
  const auto run = [&](double c) {
    const RestrictedLaw law =
        topology_restricted_controller(graph, base, c, tail);
    const Trajectory tr = simulate(prob, law.law, opts);
    ++out.bisection_steps;
    return Eval{consensus_error(tr, N, prob.T),
                accumulate_cost(tr, prob.agents, prob.weights)};
  };

  double lo = 0.0;
  double hi = 1.0;
  Eval at_hi = run(hi);
  if (at_hi.error <= target) {
    for (int k = 0; k < 60; ++k) {
      const double c = 0.5 * hi;
      const Eval e = run(c);
      if (e.error > target) {
        lo = c;
        break;
      }
      hi = c;
      at_hi = e;
    }
  } else {
    lo = hi;
    bool found = false;
    for (int k = 0; k < 60 && !found; ++k) {
      hi *= 2.0;
      at_hi = run(hi);
      if (at_hi.error <= target) found = true;
      else lo = hi;
    }
    if (!found)
      fail(ErrorCode::ToleranceNotMet,
           "no gain multiplier reaches the consensus tolerance");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    const Eval e = run(mid);
    if (e.error <= target) {
      hi = mid;
      at_hi = e;
    } else {
      lo = mid;
    }
  }
  out.gain_multiplier = hi;
  out.restricted_cost = at_hi.cost;
  out.restricted_consensus_error = at_hi.error;
  return out;
}

}  // namespace optcons
