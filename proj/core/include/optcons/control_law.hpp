#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "optcons/numkit.hpp"

namespace optcons {

enum class LawKind {
  OpenLoopFT,
  StateFeedbackFT,
  OutputFeedbackFT,
  HeterogeneousFT,
  AsymptoticState,
  AsymptoticOutput,
  ObserverBased,
  TopologyRestricted,
};

std::string_view to_string(LawKind kind);
std::optional<LawKind> parse_law_kind(std::string_view name);
bool is_finite_time(LawKind kind);

/// Implementation interface behind ControlLaw. Implementations are
/// observably immutable (time-varying gains are memoized under a lock); any
/// dynamic controller state (observer estimates) is owned by the simulator
/// and passed in as `internal`.
class LawImpl {
 public:
  virtual ~LawImpl() = default;

  /// Stacked control u (length sum m_i) at time t for stacked state x,
  /// stacked output y and controller-internal state.
  virtual Vector control(double t, const Vector& x, const Vector& y,
                         const Vector& internal) const = 0;

  virtual int internal_dim() const { return 0; }
  virtual Vector internal_rate(double t, const Vector& y,
                               const Vector& internal) const;

  /// Time at which the simulator must replace this law by after_switch().
  virtual std::optional<double> switch_time() const { return std::nullopt; }
  virtual std::shared_ptr<const LawImpl> after_switch(double ts,
                                                      const Vector& x,
                                                      const Vector& y) const;
};

/// A tagged, evaluable controller for the stacked multi-agent system.
class ControlLaw {
 public:
  ControlLaw(LawKind kind, std::shared_ptr<const LawImpl> impl,
             std::optional<double> horizon_end = std::nullopt);

  LawKind kind() const { return kind_; }

  Vector control(double t, const Vector& x, const Vector& y,
                 const Vector& internal = Vector()) const {
    return impl_->control(t, x, y, internal);
  }

  int internal_dim() const { return impl_->internal_dim(); }
  Vector internal_rate(double t, const Vector& y,
                       const Vector& internal) const {
    return impl_->internal_rate(t, y, internal);
  }

  std::optional<double> switch_time() const { return impl_->switch_time(); }
  /// For finite-time kinds: T. Asymptotic kinds return nullopt.
  std::optional<double> horizon_end() const { return horizon_end_; }

  /// The law to use from `ts` onward, built from the state captured there.
  ControlLaw after_switch(double ts, const Vector& x, const Vector& y) const;

  /// The same law with every control value multiplied by `factor`.
  ControlLaw scaled(double factor) const;

  const LawImpl& impl() const { return *impl_; }

 private:
  LawKind kind_;
  std::shared_ptr<const LawImpl> impl_;
  std::optional<double> horizon_end_;
};

}  // namespace optcons
