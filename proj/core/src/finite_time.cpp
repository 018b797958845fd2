#include "optcons/finite_time.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"
#include "gain_cache.hpp"

namespace optcons {

namespace {

constexpr double kKernelStateTol = 1e-9;

std::string interval_text(double t0, double T) {
  return "[" + std::to_string(t0) + ", " + std::to_string(T) + "]";
}

Eigen::LLT<Matrix> factor_gramian(const LtiSystem& sys, double t, double T,
                                  const QuadratureConfig& cfg,
                                  int agent = -1) {
  Eigen::LLT<Matrix> llt(output_gramian(sys, t, T, cfg).value);
  if (llt.info() != Eigen::Success) {
    std::string who = agent >= 0 ? "agent " + std::to_string(agent + 1) + " "
                                 : std::string();
    fail(ErrorCode::NotOutputControllable,
         who + "W(t,T) is singular on " + interval_text(t, T));
  }
  return llt;
}

const LtiSystem& require_homogeneous(const FiniteTimeProblem& prob) {
  if (!prob.agents.homogeneous())
    fail(ErrorCode::InvalidArgument,
         "this controller requires identical agents; use heterogeneous");
  return prob.agents.agent(0);
}

void require_in_horizon(double t, double t_start, double T) {
  const double slack = 1e-12 * std::max(1.0, std::abs(T - t_start));
  if (t < t_start - slack || t > T + slack)
    fail(ErrorCode::InvalidArgument,
         "time " + std::to_string(t) + " outside " + interval_text(t_start, T));
}

void require_before_switch(const FiniteTimeProblem& prob, double t) {
  const double ts = prob.switch_time();
  if (t > ts + 1e-12 * prob.horizon())
    fail(ErrorCode::NearSingularHorizon,
         "t = " + std::to_string(t) + " is beyond the switch time " +
             std::to_string(ts) + "; use the open-loop terminal segment");
}

// Output-determined pseudo-state C^+ y_i; exact when ker(C) is A-invariant,
// because then C e^{A s} annihilates ker(C).
Matrix output_pseudo_inverse(const LtiSystem& sys) {
  const Matrix& C = sys.C();
  return C.transpose() * (C * C.transpose()).inverse();
}

// Open-loop optimal law from (t_start, x_start):
//   u_i(t) = -B^T e^{A^T(T-t)} C^T v_i,  v = (L(a) (x) W^{-1}) (I (x) C e^{A(T-t_start)}) x.
class OpenLoopLaw final : public LawImpl {
 public:
  OpenLoopLaw(LtiSystem sys, const WeightVector& a, const Vector& x_start,
              double t_start, double T, const QuadratureConfig& cfg)
      : sys_(std::move(sys)), t_start_(t_start), T_(T) {
    const int N = a.size();
    const int n = sys_.n();
    const int p = sys_.p();
    if (x_start.size() != N * n)
      fail(ErrorCode::DimensionMismatch, "initial state has wrong length");
    const Matrix CeA = sys_.C() * mat_exp(sys_.A(), T_ - t_start_);
    Vector terminal(N * p);
    for (int i = 0; i < N; ++i)
      terminal.segment(i * p, p) = CeA * x_start.segment(i * n, n);
    const Vector spread = apply_consensus_weights(a, terminal);
    const auto llt = factor_gramian(sys_, t_start_, T_, cfg);
    multipliers_.resize(N * p);
    for (int i = 0; i < N; ++i)
      multipliers_.segment(i * p, p) = llt.solve(spread.segment(i * p, p));
  }

  Vector control(double t, const Vector&, const Vector&,
                 const Vector&) const override {
    require_in_horizon(t, t_start_, T_);
    const Matrix M = sys_.B().transpose() *
                     mat_exp(sys_.A().transpose(), T_ - t) *
                     sys_.C().transpose();
    const int N = static_cast<int>(multipliers_.size()) / sys_.p();
    Vector u(N * sys_.m());
    for (int i = 0; i < N; ++i)
      u.segment(i * sys_.m(), sys_.m()) =
          -M * multipliers_.segment(i * sys_.p(), sys_.p());
    return u;
  }

  const Vector& multipliers() const { return multipliers_; }

 private:
  LtiSystem sys_;
  double t_start_;
  double T_;
  Vector multipliers_;
};

class StateFeedbackLaw final : public LawImpl {
 public:
  explicit StateFeedbackLaw(const FiniteTimeProblem& prob)
      : prob_(prob), sys_(prob.agents.agent(0)) {}

  Vector control(double t, const Vector& x, const Vector&,
                 const Vector&) const override {
    require_before_switch(prob_, t);
    const Matrix BtP = cache_->get(t, [this](double s) -> Matrix {
      return sys_.B().transpose() *
             gramian_riccati_matrix(sys_, s, prob_.T, prob_.quad);
    });
    const Vector rel = apply_consensus_weights(prob_.weights, x);
    const int N = prob_.agents.size();
    Vector u(N * sys_.m());
    for (int i = 0; i < N; ++i)
      u.segment(i * sys_.m(), sys_.m()) =
          -BtP * rel.segment(i * sys_.n(), sys_.n());
    return u;
  }

  std::optional<double> switch_time() const override {
    return prob_.switch_time();
  }

  std::shared_ptr<const LawImpl> after_switch(double ts, const Vector& x,
                                              const Vector&) const override {
    return std::make_shared<OpenLoopLaw>(sys_, prob_.weights, x, ts, prob_.T,
                                         prob_.quad);
  }

 private:
  FiniteTimeProblem prob_;
  LtiSystem sys_;
  std::shared_ptr<detail::GainCache> cache_ = detail::make_gain_cache();
};

class OutputFeedbackLaw final : public LawImpl {
 public:
  explicit OutputFeedbackLaw(const FiniteTimeProblem& prob)
      : prob_(prob),
        sys_(prob.agents.agent(0)),
        pinv_(output_pseudo_inverse(sys_)) {}

  Vector control(double t, const Vector&, const Vector& y,
                 const Vector&) const override {
    require_before_switch(prob_, t);
    const Matrix gain = gain_at(t);
    const Vector rel = apply_consensus_weights(prob_.weights, y);
    const int N = prob_.agents.size();
    Vector u(N * sys_.m());
    for (int i = 0; i < N; ++i)
      u.segment(i * sys_.m(), sys_.m()) =
          -gain * rel.segment(i * sys_.p(), sys_.p());
    return u;
  }

  Matrix gain_at(double t) const {
    return cache_->get(t, [this](double s) { return compute_gain(s); });
  }

  Matrix compute_gain(double t) const {
    const Matrix G = related_gramian(sys_, t, prob_.T, prob_.quad).value;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::NotOutputControllable, "G(t,T) is singular");
    const Matrix BtCt = sys_.B().transpose() * sys_.C().transpose();
    return llt.solve(BtCt.transpose()).transpose();
  }

  std::optional<double> switch_time() const override {
    return prob_.switch_time();
  }

  // The terminal segment only needs C e^{A s} x_i, which the outputs
  // determine when ker(C) is A-invariant.
  std::shared_ptr<const LawImpl> after_switch(double ts, const Vector&,
                                              const Vector& y) const override {
    const int N = prob_.agents.size();
    Vector pseudo(N * sys_.n());
    for (int i = 0; i < N; ++i)
      pseudo.segment(i * sys_.n(), sys_.n()) =
          pinv_ * y.segment(i * sys_.p(), sys_.p());
    return std::make_shared<OpenLoopLaw>(sys_, prob_.weights, pseudo, ts,
                                         prob_.T, prob_.quad);
  }

 private:
  FiniteTimeProblem prob_;
  LtiSystem sys_;
  Matrix pinv_;
  std::shared_ptr<detail::GainCache> cache_ = detail::make_gain_cache();
};

// u_i(t) = B_i^T e^{A_i^T(T-t)} C_i^T v_i with v_i = W_i^{-1}(alpha* - z_i).
class HeterogeneousLaw final : public LawImpl {
 public:
  HeterogeneousLaw(const AgentNetwork& agents, std::vector<Vector> multipliers,
                   double t0, double T)
      : agents_(agents), multipliers_(std::move(multipliers)), t0_(t0), T_(T) {}

  Vector control(double t, const Vector&, const Vector&,
                 const Vector&) const override {
    require_in_horizon(t, t0_, T_);
    Vector u(agents_.total_inputs());
    for (int i = 0; i < agents_.size(); ++i) {
      const LtiSystem& s = agents_.agent(i);
      u.segment(agents_.input_offset(i), s.m()) =
          s.B().transpose() * mat_exp(s.A().transpose(), T_ - t) *
          s.C().transpose() * multipliers_[i];
    }
    return u;
  }

 private:
  AgentNetwork agents_;
  std::vector<Vector> multipliers_;
  double t0_;
  double T_;
};

struct HeterogeneousPieces {
  Vector alpha_star;
  std::vector<Vector> multipliers;
  std::vector<Matrix> gramians;
};

HeterogeneousPieces solve_heterogeneous(const FiniteTimeProblem& prob) {
  const AgentNetwork& net = prob.agents;
  const int N = net.size();
  const int p = net.output_dim();
  std::vector<Eigen::LLT<Matrix>> factors;
  std::vector<Vector> terminal;
  HeterogeneousPieces out;
  Matrix info = Matrix::Zero(p, p);
  Vector info_vec = Vector::Zero(p);
  for (int i = 0; i < N; ++i) {
    const LtiSystem& s = net.agent(i);
    out.gramians.push_back(output_gramian(s, prob.t0, prob.T, prob.quad).value);
    factors.emplace_back(out.gramians.back());
    if (factors.back().info() != Eigen::Success)
      fail(ErrorCode::NotOutputControllable,
           "agent " + std::to_string(i + 1) + " not output controllable on " +
               interval_text(prob.t0, prob.T));
    terminal.push_back(s.C() * mat_exp(s.A(), prob.T - prob.t0) *
                       net.agent_state(prob.x0, i));
    const Matrix Winv = factors.back().solve(Matrix::Identity(p, p));
    info += prob.weights[i] * Winv;
    info_vec += prob.weights[i] * (Winv * terminal.back());
  }
  out.alpha_star = info.llt().solve(info_vec);
  for (int i = 0; i < N; ++i)
    out.multipliers.push_back(factors[i].solve(out.alpha_star - terminal[i]));
  return out;
}

}  // namespace

double FiniteTimeProblem::switch_time() const {
  const double eps = eps_switch.value_or(1e-3 * (T - t0));
  return T - eps;
}

void FiniteTimeProblem::validate() const {
  if (!std::isfinite(t0) || !std::isfinite(T) || !(T > t0))
    fail(ErrorCode::DegenerateInterval,
         "horizon requires finite t0 < T, got " + interval_text(t0, T));
  if (weights.size() != agents.size())
    fail(ErrorCode::DimensionMismatch,
         std::to_string(weights.size()) + " weights for " +
             std::to_string(agents.size()) + " agents");
  if (x0.size() != agents.total_states())
    fail(ErrorCode::DimensionMismatch,
         "initial state has length " + std::to_string(x0.size()) +
             ", expected " + std::to_string(agents.total_states()));
  require_finite(x0, "initial state");
  if (eps_switch && !(*eps_switch > 0.0 && *eps_switch < T - t0))
    fail(ErrorCode::InvalidArgument, "eps_switch must lie in (0, T - t0)");
  quad.validate();
  const int distinct = agents.homogeneous() ? 1 : agents.size();
  for (int i = 0; i < distinct; ++i) {
    if (!is_output_controllable(agents.agent(i), T - t0, kControllabilityTol,
                                quad))
      fail(ErrorCode::NotOutputControllable,
           (agents.homogeneous() ? std::string("agents are")
                                 : "agent " + std::to_string(i + 1) + " is") +
               " not output controllable on " + interval_text(t0, T));
  }
}

ControlLaw open_loop_law(const LtiSystem& sys, const WeightVector& a,
                         const Vector& x_start, double t_start, double T,
                         const QuadratureConfig& cfg) {
  return ControlLaw(LawKind::OpenLoopFT,
                    std::make_shared<OpenLoopLaw>(sys, a, x_start, t_start, T,
                                                  cfg),
                    T);
}

Vector open_loop_control(const FiniteTimeProblem& prob, double t) {
  const LtiSystem& sys = require_homogeneous(prob);
  const OpenLoopLaw law(sys, prob.weights, prob.x0, prob.t0, prob.T, prob.quad);
  return law.control(t, prob.x0, Vector(), Vector());
}

Matrix state_feedback_gain(const FiniteTimeProblem& prob, double t) {
  const LtiSystem& sys = require_homogeneous(prob);
  require_in_horizon(t, prob.t0, prob.T);
  require_before_switch(prob, t);
  const Matrix BtP =
      sys.B().transpose() * gramian_riccati_matrix(sys, t, prob.T, prob.quad);
  return kron(consensus_weight_matrix(prob.weights), BtP);
}

Matrix output_feedback_gain(const FiniteTimeProblem& prob, double t) {
  const LtiSystem& sys = require_homogeneous(prob);
  if (!is_kernel_A_invariant(sys))
    fail(ErrorCode::KernelNotInvariant,
         "output feedback requires ker(C) to be A-invariant");
  require_in_horizon(t, prob.t0, prob.T);
  require_before_switch(prob, t);
  const OutputFeedbackLaw law(prob);
  return kron(consensus_weight_matrix(prob.weights), law.gain_at(t));
}

Vector predict_consensus_point(const FiniteTimeProblem& prob) {
  const LtiSystem& sys = require_homogeneous(prob);
  const Matrix& A = sys.A();
  const int N = prob.agents.size();
  const int p = sys.p();
  Vector outputs(N * p);
  for (int i = 0; i < N; ++i) {
    const Vector xi = prob.agents.agent_state(prob.x0, i);
    if ((A * xi).norm() > kKernelStateTol * A.norm() * xi.norm())
      fail(ErrorCode::InitialStateNotInKernel,
           "x_" + std::to_string(i + 1) + "(t0) is not in ker(A)");
    outputs.segment(i * p, p) = sys.C() * xi;
  }
  return prob.weights.weighted_average(outputs);
}

HeterogeneousSolution heterogeneous_controller(const FiniteTimeProblem& prob) {
  HeterogeneousPieces pieces = solve_heterogeneous(prob);
  auto impl = std::make_shared<HeterogeneousLaw>(
      prob.agents, std::move(pieces.multipliers), prob.t0, prob.T);
  return {pieces.alpha_star,
          ControlLaw(LawKind::HeterogeneousFT, std::move(impl), prob.T)};
}

double optimal_cost(const FiniteTimeProblem& prob) {
  // Each u_i = M(t) v_i contributes a_i v_i^T W_i v_i.
  if (prob.agents.homogeneous()) {
    const LtiSystem& sys = prob.agents.agent(0);
    const OpenLoopLaw law(sys, prob.weights, prob.x0, prob.t0, prob.T,
                          prob.quad);
    const Matrix W = output_gramian(sys, prob.t0, prob.T, prob.quad).value;
    const int p = sys.p();
    double cost = 0.0;
    for (int i = 0; i < prob.agents.size(); ++i) {
      const Vector v = law.multipliers().segment(i * p, p);
      cost += prob.weights[i] * v.dot(W * v);
    }
    return cost;
  }
  const HeterogeneousPieces pieces = solve_heterogeneous(prob);
  double cost = 0.0;
  for (int i = 0; i < prob.agents.size(); ++i)
    cost += prob.weights[i] *
            pieces.multipliers[i].dot(pieces.gramians[i] * pieces.multipliers[i]);
  return cost;
}

ControlLaw make_control_law(const FiniteTimeProblem& prob, LawKind kind) {
  prob.validate();
  switch (kind) {
    case LawKind::OpenLoopFT: {
      const LtiSystem& sys = require_homogeneous(prob);
      return open_loop_law(sys, prob.weights, prob.x0, prob.t0, prob.T,
                           prob.quad);
    }
    case LawKind::StateFeedbackFT:
      require_homogeneous(prob);
      return ControlLaw(kind, std::make_shared<StateFeedbackLaw>(prob), prob.T);
    case LawKind::OutputFeedbackFT: {
      const LtiSystem& sys = require_homogeneous(prob);
      if (!is_kernel_A_invariant(sys))
        fail(ErrorCode::KernelNotInvariant,
             "output feedback requires ker(C) to be A-invariant");
      return ControlLaw(kind, std::make_shared<OutputFeedbackLaw>(prob), prob.T);
    }
    case LawKind::HeterogeneousFT:
      return heterogeneous_controller(prob).law;
    default:
      fail(ErrorCode::InvalidArgument,
           std::string(to_string(kind)) + " is not a finite-time law");
  }
}

}  // namespace optcons
