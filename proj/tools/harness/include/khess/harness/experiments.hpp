#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "khess/harness/config.hpp"
#include "khess/harness/presets.hpp"
#include "khess/harness/report.hpp"

namespace khess::harness {

using Rng = std::mt19937_64;

/// Dispatches on config.kind; sets the worker count first. Solver errors
/// are recorded in Report::failure with the partial tables kept.
Report run_experiment(const ExperimentConfig& config);

Report run_solve(const ExperimentConfig& config);
Report run_envelope(const ExperimentConfig& config);
Report run_radial(const ExperimentConfig& config);
Report run_stability(const ExperimentConfig& config);
Report run_oscillation(const ExperimentConfig& config);
/// Acceptance criteria (all of them unless [verify] criteria is set) plus
/// the property suite at the configured (n, k). Never throws for a failed
/// check.
Report run_verify(const ExperimentConfig& config);

/// "AC1" .. "AC10"
std::vector<std::string> criterion_ids();

/// Runs one acceptance criterion at its fixed parameters. The check and
/// its tables are appended to `sink`; the check is also returned.
Check run_criterion(const std::string& id, std::uint64_t seed, Report& sink);

/// Property checks at the problem's (n, k); appended to `sink`.
void run_properties(const ExperimentConfig& config, Report& sink);

/// Random Hermitian B (entries uniform in [-1, 1]) shifted by t Id, t the
/// smallest shift putting it in the closed Gamma_k cone, plus `extra`.
HermitianMatrix random_cone_member(Rng& rng, int n, int k, double extra = 0.1);

/// Random wave sum on the active axes of `grid` with |wave vector entries| <= 1.
WaveSum random_waves(Rng& rng, const TorusGrid& grid, int count, double amplitude);

/// Largest t in {1, 1/2, ...} with omega + dd^c(t phi) certified in Gamma_k;
/// returns the scaled field.
GridFunction scale_into_cone(const FormField& omega, GridFunction phi, int k);

}  // namespace khess::harness
