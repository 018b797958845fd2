#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optcons/errors.hpp"
#include "optcons/runner.hpp"
#include "optcons/scenario.hpp"

namespace {

enum class Command { Run, Certify, CompareTopology, Check };

int dispatch(Command cmd, const std::string& path, const optcons::RunOptions& opts) {
  using namespace optcons;
  const Scenario loaded = load_scenario(path);
  const Scenario s = apply_overrides(loaded, opts);
  Report report;
  switch (cmd) {
    case Command::Run: report = run_scenario(s, opts); break;
    case Command::Certify: report = certify_scenario(s, opts); break;
    case Command::CompareTopology: report = compare_topology_scenario(s, opts); break;
    case Command::Check: report = check_scenario(s); break;
  }
  report.write(std::cout);
  return report.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal output consensus: synthesis, simulation and certification"};
  app.require_subcommand(1);

  optcons::RunOptions opts;
  std::string scenario_path;
  std::optional<double> step, eps_switch;
  std::string method;
  std::string out_dir = ".";

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--step", step, "Fixed integrator step")->check(CLI::PositiveNumber);
    sub->add_option("--method", method, "Integrator")->check(CLI::IsMember({"rk4", "rk45"}));
    sub->add_option("--out-dir", out_dir, "Directory for CSV and report files");
    sub->add_option("--tol-consensus", opts.tol_consensus,
                    "Relative consensus tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eps-switch", eps_switch, "Terminal open-loop window width")
        ->check(CLI::PositiveNumber);
  };

  Command cmd = Command::Run;
  auto* run = app.add_subcommand("run", "Synthesize, simulate and summarize a scenario");
  auto* cert = app.add_subcommand("certify", "Compare the controller cost with the discretized oracle");
  auto* topo = app.add_subcommand("compare-topology", "Optimal law vs topology-restricted law");
  auto* check = app.add_subcommand("check", "Validate a scenario file only");
  for (auto* sub : {run, cert, topo, check}) add_common(sub);
  run->callback([&] { cmd = Command::Run; });
  cert->callback([&] { cmd = Command::Certify; });
  topo->callback([&] { cmd = Command::CompareTopology; });
  check->callback([&] { cmd = Command::Check; });

  CLI11_PARSE(app, argc, argv);

  opts.step = step;
  opts.eps_switch = eps_switch;
  opts.out_dir = out_dir;
  if (method == "rk4") opts.method = optcons::Integrator::RK4;
  if (method == "rk45") opts.method = optcons::Integrator::RK45;

  try {
    return dispatch(cmd, scenario_path, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
