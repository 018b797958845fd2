#pragma once

#include <vector>

#include "optcons/lti_system.hpp"

namespace optcons {

/// N agents with stacked state x = [x_1; ...; x_N], likewise u and y.
/// Agents may differ in state and input dimension but share the output
/// dimension p.
class AgentNetwork {
 public:
  AgentNetwork(const LtiSystem& sys, int agents);
  explicit AgentNetwork(std::vector<LtiSystem> systems);

  int size() const { return static_cast<int>(systems_.size()); }
  /// True when every agent has the same (A, B, C).
  bool homogeneous() const { return homogeneous_; }
  const LtiSystem& agent(int i) const { return systems_.at(i); }
  const std::vector<LtiSystem>& agents() const { return systems_; }

  int state_offset(int i) const { return state_offsets_.at(i); }
  int input_offset(int i) const { return input_offsets_.at(i); }
  int total_states() const { return state_offsets_.back(); }
  int total_inputs() const { return input_offsets_.back(); }
  int output_dim() const { return systems_.front().p(); }
  int total_outputs() const { return output_dim() * size(); }
  int max_state_dim() const;
  int max_input_dim() const;

  Vector agent_state(const Vector& x, int i) const {
    return x.segment(state_offset(i), agent(i).n());
  }
  Vector agent_input(const Vector& u, int i) const {
    return u.segment(input_offset(i), agent(i).m());
  }
  Vector agent_output(const Vector& y, int i) const {
    return y.segment(i * output_dim(), output_dim());
  }

  /// (I_N (x) C) x for the stacked state.
  Vector outputs(const Vector& x) const;
  /// Stacked A_i x_i + B_i u_i.
  Vector dynamics(const Vector& x, const Vector& u) const;

 private:
  void build_layout();

  std::vector<LtiSystem> systems_;
  std::vector<int> state_offsets_;
  std::vector<int> input_offsets_;
  bool homogeneous_ = true;
};

}  // namespace optcons
