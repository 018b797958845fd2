#include "optcons/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "optcons/errors.hpp"

namespace optcons {

Vector DiscretizedProblem::energy_weights() const {
  Vector d(unknowns());
  const int K = cells();
  int offset = 0;
  for (std::size_t i = 0; i < input_dims.size(); ++i) {
    for (int k = 0; k < K; ++k) {
      const double width = grid[k + 1] - grid[k];
      d.segment(offset, input_dims[i]).setConstant(weights(i) * width);
      offset += input_dims[i];
    }
  }
  return d;
}

DiscretizedProblem discretize(const FiniteTimeProblem& prob, int K) {
  if (K < 2) fail(ErrorCode::InvalidArgument, "oracle grid needs K >= 2 cells");
  prob.validate();
  const AgentNetwork& net = prob.agents;
  const int N = net.size();
  const int p = net.output_dim();

  DiscretizedProblem dp;
  dp.weights = prob.weights.values();
  dp.grid.resize(K + 1);
  const double h = prob.horizon() / K;
  for (int k = 0; k <= K; ++k) dp.grid[k] = prob.t0 + k * h;
  dp.grid[K] = prob.T;

  std::vector<int> offsets{0};
  std::vector<Vector> terminal;
  dp.sensitivity.resize(N);
  for (int i = 0; i < N; ++i) {
    const LtiSystem& s = net.agent(i);
    dp.input_dims.push_back(s.m());
    offsets.push_back(offsets.back() + s.m() * K);
    for (int k = 0; k < K; ++k) {
      const double mid = 0.5 * (dp.grid[k] + dp.grid[k + 1]);
      dp.sensitivity[i].push_back(s.C() * mat_exp(s.A(), prob.T - mid) * s.B());
    }
    terminal.push_back(s.C() * mat_exp(s.A(), prob.horizon()) *
                       net.agent_state(prob.x0, i));
  }

  // Row block i-1:  sum_k h (S_1k u_1k - S_ik u_ik) = -(z_1 - z_i).
  dp.constraint_matrix = Matrix::Zero((N - 1) * p, offsets.back());
  dp.constraint_rhs.resize((N - 1) * p);
  for (int i = 1; i < N; ++i) {
    const int row = (i - 1) * p;
    for (int k = 0; k < K; ++k) {
      const double width = dp.grid[k + 1] - dp.grid[k];
      const int m1 = dp.input_dims[0];
      const int mi = dp.input_dims[i];
      dp.constraint_matrix.block(row, offsets[0] + k * m1, p, m1) =
          width * dp.sensitivity[0][k];
      dp.constraint_matrix.block(row, offsets[i] + k * mi, p, mi) =
          -width * dp.sensitivity[i][k];
    }
    dp.constraint_rhs.segment(row, p) = -(terminal[0] - terminal[i]);
  }
  return dp;
}

Matrix discrete_gram_matrix(const DiscretizedProblem& dp) {
  const Vector dinv = dp.energy_weights().cwiseInverse();
  return dp.constraint_matrix * dinv.asDiagonal() *
         dp.constraint_matrix.transpose();
}

MinNormSolution solve_min_norm(const DiscretizedProblem& dp) {
  const Vector dinv = dp.energy_weights().cwiseInverse();
  const Matrix gram = discrete_gram_matrix(dp);
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
    fail(ErrorCode::RankDeficientConstraints,
         "constraint rows are linearly dependent");
  MinNormSolution sol;
  sol.multipliers = llt.solve(dp.constraint_rhs);
  sol.u_grid = dinv.asDiagonal() *
               (dp.constraint_matrix.transpose() * sol.multipliers);
  const Vector d = dp.energy_weights();
  sol.cost = sol.u_grid.dot(d.asDiagonal() * sol.u_grid);
  return sol;
}

CertificationReport certify(const FiniteTimeProblem& prob,
                            const ControlLaw& law,
                            const std::vector<int>& K_sequence,
                            const SimOptions& opts, double gap_tol,
                            double consensus_tol) {
  if (K_sequence.empty())
    fail(ErrorCode::InvalidArgument, "certification needs at least one K");
  CertificationReport rep;
  rep.gap_tol = gap_tol;
  rep.consensus_tol = consensus_tol;
  const Trajectory traj = simulate(prob, law, opts);
  const int N = prob.agents.size();
  rep.law_cost = accumulate_cost(traj, prob.agents, prob.weights);
  rep.closed_form_cost = optimal_cost(prob);
  rep.initial_spread = consensus_error(traj, N, prob.t0);
  rep.law_consensus_error = consensus_error(traj, N, prob.T);
  // Agents may start with equal outputs and still need steering.
  rep.rendezvous_ok = rep.law_consensus_error <=
                      consensus_tol * std::max(rep.initial_spread, 1.0);

  int largest = K_sequence.front();
  double gap_at_largest = 0.0;
  for (const int K : K_sequence) {
    const MinNormSolution sol = solve_min_norm(discretize(prob, K));
    CertificationRow row;
    row.K = K;
    row.oracle_cost = sol.cost;
    row.rel_gap = sol.cost > 0.0 ? (rep.law_cost - sol.cost) / sol.cost
                                 : std::abs(rep.law_cost);
    rep.rows.push_back(row);
    if (K >= largest) {
      largest = K;
      gap_at_largest = row.rel_gap;
    }
  }
  rep.passed = rep.rendezvous_ok && std::abs(gap_at_largest) <= gap_tol;
  return rep;
}

void write_certification_table(std::ostream& out,
                               const CertificationReport& report) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::left << std::setw(8) << "K" << std::setw(22) << "oracle_cost"
      << std::setw(22) << "analytic_cost" << std::setw(22) << "law_cost"
      << "rel_gap\n";
  out << std::setprecision(12);
  for (const auto& row : report.rows) {
    out << std::setw(8) << row.K << std::setw(22) << row.oracle_cost
        << std::setw(22) << report.closed_form_cost << std::setw(22)
        << report.law_cost << row.rel_gap << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace optcons
