#include "optcons/control_law.hpp"

#include <array>
#include <string>
#include <utility>

#include "optcons/errors.hpp"

namespace optcons {

namespace {

constexpr std::array<std::pair<LawKind, std::string_view>, 8> kNames{{
    {LawKind::OpenLoopFT, "open_loop"},
    {LawKind::StateFeedbackFT, "state_feedback"},
    {LawKind::OutputFeedbackFT, "output_feedback"},
    {LawKind::HeterogeneousFT, "heterogeneous"},
    {LawKind::AsymptoticState, "asymptotic_state"},
    {LawKind::AsymptoticOutput, "asymptotic_output"},
    {LawKind::ObserverBased, "observer"},
    {LawKind::TopologyRestricted, "topology_restricted"},
}};

class ScaledLaw final : public LawImpl {
 public:
  ScaledLaw(std::shared_ptr<const LawImpl> inner, double factor)
      : inner_(std::move(inner)), factor_(factor) {}

  Vector control(double t, const Vector& x, const Vector& y,
                 const Vector& internal) const override {
    return factor_ * inner_->control(t, x, y, internal);
  }
  int internal_dim() const override { return inner_->internal_dim(); }
  Vector internal_rate(double t, const Vector& y,
                       const Vector& internal) const override {
    return inner_->internal_rate(t, y, internal);
  }
  std::optional<double> switch_time() const override {
    return inner_->switch_time();
  }
  std::shared_ptr<const LawImpl> after_switch(double ts, const Vector& x,
                                              const Vector& y) const override {
    return std::make_shared<ScaledLaw>(inner_->after_switch(ts, x, y),
                                       factor_);
  }

 private:
  std::shared_ptr<const LawImpl> inner_;
  double factor_;
};

}  // namespace

std::string_view to_string(LawKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<LawKind> parse_law_kind(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  return std::nullopt;
}

bool is_finite_time(LawKind kind) {
  switch (kind) {
    case LawKind::OpenLoopFT:
    case LawKind::StateFeedbackFT:
    case LawKind::OutputFeedbackFT:
    case LawKind::HeterogeneousFT:
    case LawKind::TopologyRestricted:
      return true;
    default:
      return false;
  }
}

Vector LawImpl::internal_rate(double, const Vector&, const Vector&) const {
  return Vector();
}

std::shared_ptr<const LawImpl> LawImpl::after_switch(double, const Vector&,
                                                     const Vector&) const {
  fail(ErrorCode::InvalidArgument, "this control law has no switch protocol");
}

ControlLaw::ControlLaw(LawKind kind, std::shared_ptr<const LawImpl> impl,
                       std::optional<double> horizon_end)
    : kind_(kind), impl_(std::move(impl)), horizon_end_(horizon_end) {
  if (!impl_) fail(ErrorCode::InvalidArgument, "null control law");
}

ControlLaw ControlLaw::after_switch(double ts, const Vector& x,
                                    const Vector& y) const {
  return ControlLaw(kind_, impl_->after_switch(ts, x, y), horizon_end_);
}

ControlLaw ControlLaw::scaled(double factor) const {
  return ControlLaw(kind_, std::make_shared<ScaledLaw>(impl_, factor),
                    horizon_end_);
}

}  // namespace optcons
