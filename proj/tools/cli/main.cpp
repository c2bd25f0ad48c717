// khess <experiment> --config FILE [--out DIR] [--seed S] [--threads T]
//
// exit codes: 0 all checks pass, 1 some check failed, 2 bad config,
// 3 solver failure
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "khess/harness/experiments.hpp"

namespace {

using namespace khess::harness;

int run(ExperimentKind kind, const std::string& config_path, const std::optional<std::string>& out,
        const std::optional<std::uint64_t>& seed, const std::optional<int>& threads) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (cfg.kind != kind) {
      throw ValidationError("experiment.kind", "config is for '" + to_string(cfg.kind) + "', not '" + to_string(kind) + "'");
    }
    if (out) cfg.out = *out;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    validate(cfg);
  } catch (const khess::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

  Report report;
  try {
    report = run_experiment(cfg);
  } catch (const khess::Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  try {
    for (const auto& path : write_report(report, cfg.out)) std::cerr << "wrote " << path.string() << "\n";
  } catch (const khess::Error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 3;
  }
  for (const auto& c : report.checks) std::cout << summary_line(c) << "\n";
  if (!report.failure.empty()) {
    std::cerr << "solver failure: " << report.failure << "\n";
    return 3;
  }
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-Hessian experiments on the flat torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<ExperimentKind> chosen;

  for (auto kind : {ExperimentKind::Solve, ExperimentKind::Envelope, ExperimentKind::Radial, ExperimentKind::Stability,
                    ExperimentKind::Oscillation, ExperimentKind::Verify}) {
    static const std::map<ExperimentKind, std::string> help{
        {ExperimentKind::Solve, "solve the Hessian equation (continuation for degenerate omega)"},
        {ExperimentKind::Envelope, "penalized envelope schedule with rate fit"},
        {ExperimentKind::Radial, "radial scan of integrability and oscillation"},
        {ExperimentKind::Stability, "perturb the density and fit the stability constant"},
        {ExperimentKind::Oscillation, "oscillation under truncated singular densities"},
        {ExperimentKind::Verify, "acceptance criteria and property checks"}};
    auto* sub = app.add_subcommand(to_string(kind), help.at(kind));
    sub->add_option("--config", config_path, "INI experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides [run] out)");
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run(*chosen, config_path, out, seed, threads);
}
