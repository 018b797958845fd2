#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "optcons/scenario.hpp"

namespace optcons {

/// Command-line overrides applied on top of a scenario.
struct RunOptions {
  std::optional<double> step;
  std::optional<Integrator> method;
  std::optional<double> eps_switch;
  std::filesystem::path out_dir = ".";
  double tol_consensus = 1e-6;
  /// Also write the trajectory CSV and report file (off for dry checks).
  bool write_artifacts = true;
};

/// Ordered `key = value` summary.
class Report {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }
  void add(const std::string& key, double value);
  void add(const std::string& key, long long value);
  void add(const std::string& key, bool value);
  void add(const std::string& key, const std::vector<double>& values);
  /// Free text appended after the key/value lines (e.g. tables).
  void append_block(const std::string& text) { blocks_.push_back(text); }

  std::optional<std::string> get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  void write(std::ostream& out) const;

  /// Whether the run met its success criterion.
  bool ok = true;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> blocks_;
};

/// Applies overrides from `opts` to a copy of the scenario and revalidates.
Scenario apply_overrides(Scenario s, const RunOptions& opts);

/// Synthesizes the scenario's controller, simulates it and summarizes the
/// run (plus oracle certification when the scenario has a [certify]
/// section). ok = rendezvous / decay criterion met.
Report run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Oracle certification of the scenario's finite-time controller.
/// ok = certification passed.
Report certify_scenario(const Scenario& s, const RunOptions& opts = {});

/// Optimal output-feedback law against the [topology] restricted law.
/// ok = restricted cost exceeds optimal cost by more than tol_consensus.
Report compare_topology_scenario(const Scenario& s, const RunOptions& opts = {});

/// Validation summary only.
Report check_scenario(const Scenario& s);

}  // namespace optcons
