#pragma once

#include <iosfwd>
#include <vector>

#include "optcons/control_law.hpp"
#include "optcons/finite_time.hpp"
#include "optcons/sim.hpp"

namespace optcons {

/// Rendezvous problem restricted to piecewise-constant controls on a
/// uniform grid of K cells, with midpoint-rule terminal sensitivities.
///
/// Unknowns are ordered agent-major: u[(i*K + k)*m_i ...] is agent i's
/// control on cell k. The constraints y_1(T) - y_i(T) = 0, i = 2..N, read
/// M u = c.
struct DiscretizedProblem {
  std::vector<double> grid;  // K + 1 points, t0 .. T
  /// sensitivity[i][k] = C_i e^{A_i(T - s_k)} B_i at the cell midpoint s_k.
  std::vector<std::vector<Matrix>> sensitivity;
  Vector weights;  // a
  std::vector<int> input_dims;
  Matrix constraint_matrix;  // (N-1)p x sum_i m_i K
  Vector constraint_rhs;     // -(C_1 e^{A_1 T'} x_1 - C_i e^{A_i T'} x_i) stacked

  int cells() const { return static_cast<int>(grid.size()) - 1; }
  int unknowns() const { return static_cast<int>(constraint_matrix.cols()); }
  /// Diagonal of the discrete energy form: a_i * cell width per unknown.
  Vector energy_weights() const;
};

DiscretizedProblem discretize(const FiniteTimeProblem& prob, int K);

struct MinNormSolution {
  Vector u_grid;
  Vector multipliers;  // beta, one block per constraint
  double cost = 0.0;
};

/// Weighted minimum-norm solve via the normal equations
///   (M D^{-1} M^T) beta = c,  u = D^{-1} M^T beta.
MinNormSolution solve_min_norm(const DiscretizedProblem& dp);

/// M D^{-1} M^T, which tends to V2(a) (x) W(t0,T) as K grows.
Matrix discrete_gram_matrix(const DiscretizedProblem& dp);

struct CertificationRow {
  int K = 0;
  double oracle_cost = 0.0;
  double rel_gap = 0.0;  // (law_cost - oracle_cost) / oracle_cost
};

struct CertificationReport {
  double law_cost = 0.0;          // simulated cost of the certified law
  double closed_form_cost = 0.0;  // analytic optimum
  double law_consensus_error = 0.0;
  double initial_spread = 0.0;
  std::vector<CertificationRow> rows;
  double gap_tol = 0.01;
  double consensus_tol = 1e-6;
  bool rendezvous_ok = false;
  bool passed = false;
};

/// Simulates `law`, then compares its cost to the oracle at each K. Passes
/// iff the law reaches rendezvous (consensus_tol times max(spread, 1)) and the relative
/// cost gap at the largest K is within gap_tol.
CertificationReport certify(const FiniteTimeProblem& prob,
                            const ControlLaw& law,
                            const std::vector<int>& K_sequence,
                            const SimOptions& opts = {},
                            double gap_tol = 0.01,
                            double consensus_tol = 1e-6);

/// Plain-text table: K, oracle_cost, analytic_cost (closed form), law_cost,
/// rel_gap (law against oracle).
void write_certification_table(std::ostream& out,
                               const CertificationReport& report);

}  // namespace optcons
