#include "optcons/network.hpp"

#include <algorithm>
#include <string>

#include "optcons/errors.hpp"

namespace optcons {

AgentNetwork::AgentNetwork(const LtiSystem& sys, int agents)
    : systems_(static_cast<std::size_t>(std::max(agents, 0)), sys) {
  if (agents < 2) fail(ErrorCode::InvalidArgument, "at least two agents are required");
  build_layout();
}

AgentNetwork::AgentNetwork(std::vector<LtiSystem> systems)
    : systems_(std::move(systems)) {
  if (systems_.size() < 2)
    fail(ErrorCode::InvalidArgument, "at least two agents are required");
  build_layout();
}

void AgentNetwork::build_layout() {
  state_offsets_.assign(1, 0);
  input_offsets_.assign(1, 0);
  const int p = systems_.front().p();
  for (std::size_t i = 0; i < systems_.size(); ++i) {
    const LtiSystem& s = systems_[i];
    if (s.p() != p)
      fail(ErrorCode::DimensionMismatch,
           "agent " + std::to_string(i + 1) + " has output dimension " +
               std::to_string(s.p()) + ", expected " + std::to_string(p));
    state_offsets_.push_back(state_offsets_.back() + s.n());
    input_offsets_.push_back(input_offsets_.back() + s.m());
    if (!(s == systems_.front())) homogeneous_ = false;
  }
}

int AgentNetwork::max_state_dim() const {
  int out = 0;
  for (const auto& s : systems_) out = std::max(out, s.n());
  return out;
}

int AgentNetwork::max_input_dim() const {
  int out = 0;
  for (const auto& s : systems_) out = std::max(out, s.m());
  return out;
}

Vector AgentNetwork::outputs(const Vector& x) const {
  if (x.size() != total_states())
    fail(ErrorCode::DimensionMismatch, "stacked state has wrong length");
  const int p = output_dim();
  Vector y(total_outputs());
  for (int i = 0; i < size(); ++i)
    y.segment(i * p, p) = agent(i).C() * agent_state(x, i);
  return y;
}

Vector AgentNetwork::dynamics(const Vector& x, const Vector& u) const {
  if (x.size() != total_states() || u.size() != total_inputs())
    fail(ErrorCode::DimensionMismatch, "stacked state or input has wrong length");
  Vector dx(total_states());
  for (int i = 0; i < size(); ++i) {
    const LtiSystem& s = agent(i);
    dx.segment(state_offset(i), s.n()) =
        s.A() * agent_state(x, i) + s.B() * agent_input(u, i);
  }
  return dx;
}

}  // namespace optcons
