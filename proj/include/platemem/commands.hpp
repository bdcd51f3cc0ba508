#pragma once

#include "platemem/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace platemem {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitVerification = 4 };

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int threads = 1;
};

/// Energy trace (energy.csv) and decay summary (simulate_summary.json).
nlohmann::ordered_json cmd_simulate(const ExperimentConfig& config, const RunOptions& options);

/// eig_count eigenvalues nearest the shift per mode (spectrum.json) plus
/// full-spectrum flags (spectrum_summary.json).
nlohmann::ordered_json cmd_spectrum(const ExperimentConfig& config, const RunOptions& options);

/// Resolvent sweep (resolvent.csv) and growth fit (resolvent_fit.json). The
/// CSV is written before the fit, so it survives a degenerate grid.
nlohmann::ordered_json cmd_resolvent(const ExperimentConfig& config, const RunOptions& options);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    nlohmann::ordered_json detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool passed() const;
    std::vector<std::string> failing() const;
    nlohmann::ordered_json to_json() const;
};

/// Full invariant suite; writes verify.json, refinement.csv and
/// trace_residuals.json. Every check runs even if an earlier one fails.
VerifyReport cmd_verify(const ExperimentConfig& config, const RunOptions& options);

/// Common header of every summary file.
nlohmann::ordered_json summary_header(const ExperimentConfig& config, const std::string& command);

/// Energy trend over a trace: "constant", "nonincreasing" or "increasing".
std::string energy_monotonicity(const EnergyTrace& trace);

}  // namespace platemem
