#pragma once

#include "platemem/dynamics.hpp"
#include "platemem/mode_system.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace platemem {

inline constexpr const char* kVersion = "1.0.0";

/// I/O or JSON syntax problem while reading a config file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything an experiment needs. Only rho, beta and mu are required in the
/// JSON file; the remaining members carry the documented defaults.
struct ExperimentConfig {
    double rho = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double r_interface = 1.0;
    double r_outer = 2.0;
    std::array<double, 2> x0{0.0, 0.0};
    std::vector<int> modes{0, 1, 2};
    int n1 = 32;
    int n2 = 32;
    int quad_order = 6;
    double T = 20.0;
    double dt = 0.01;
    double lambda_min = 1.0;
    double lambda_max = 1000.0;
    int lambda_per_decade = 64;
    int eig_count = 10;
    std::array<double, 2> shift{0.0, 0.0};  // (re, im)
    std::string initial = "velocity-bump";  // or "displacement-bump"
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    double fit_window = 0.5;  // trailing fraction of [0, T] used by the decay fits

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parse and validate. Unknown keys and wrongly typed values are rejected
/// with a ValidationError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full serialization (every key, defaults included); parse_config inverts it.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

nlohmann::ordered_json module_versions();

/// Markdown table of keys, defaults and constraints.
std::string config_reference();

PhysicalParams physical_params(const ExperimentConfig& config);
AnnulusGeometry geometry(const ExperimentConfig& config);
Discretization discretization(const ExperimentConfig& config);
InitialKind initial_kind(const ExperimentConfig& config);

/// One assembled system per configured mode, in config order.
std::vector<ModeSystem> build_systems(const ExperimentConfig& config, int threads = 1);

}  // namespace platemem
