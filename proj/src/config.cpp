#include "platemem/config.hpp"

#include "platemem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace platemem {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {"rho", "beta", "mu", "r_interface", "r_outer", "x0", "modes", "n1", "n2",
                                     "quad_order", "T", "dt", "lambda_min", "lambda_max", "lambda_per_decade",
                                     "eig_count", "shift", "initial", "output_dir", "seed", "fit_window"};

double get_number(const json& j, const char* key, std::optional<double> fallback) {
    if (!j.contains(key)) {
        if (!fallback) throw ValidationError(key, "required key is missing");
        return *fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number()) throw ValidationError(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(key, "must be finite");
    return x;
}

int get_int(const json& j, const char* key, int fallback, int lo, int hi) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi)
        throw ValidationError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
}

std::array<double, 2> get_pair(const json& j, const char* key, std::array<double, 2> fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ValidationError(key, "expected an array of two numbers");
    std::array<double, 2> out{v[0].get<double>(), v[1].get<double>()};
    if (!std::isfinite(out[0]) || !std::isfinite(out[1])) throw ValidationError(key, "must be finite");
    return out;
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ValidationError(key, "expected a string");
    return j.at(key).get<std::string>();
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ValidationError("<root>", "config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kKeys.contains(key)) throw ValidationError(key, "unknown key");

    ExperimentConfig c;
    c.rho = get_number(j, "rho", std::nullopt);
    c.beta = get_number(j, "beta", std::nullopt);
    c.mu = get_number(j, "mu", std::nullopt);
    c.r_interface = get_number(j, "r_interface", c.r_interface);
    c.r_outer = get_number(j, "r_outer", c.r_outer);
    c.x0 = get_pair(j, "x0", c.x0);
    if (j.contains("modes")) {
        const json& v = j.at("modes");
        if (!v.is_array() || v.empty()) throw ValidationError("modes", "expected a nonempty array of integers");
        c.modes.clear();
        std::set<int> seen;
        for (const json& m : v) {
            if (!m.is_number_integer()) throw ValidationError("modes", "expected integers");
            const auto k = m.get<std::int64_t>();
            if (k < 0 || k > 256) throw ValidationError("modes", "each mode must lie in [0, 256]");
            if (!seen.insert(static_cast<int>(k)).second) throw ValidationError("modes", "duplicate mode");
            c.modes.push_back(static_cast<int>(k));
        }
    }
    c.n1 = get_int(j, "n1", c.n1, 4, 4096);
    c.n2 = get_int(j, "n2", c.n2, 4, 4096);
    c.quad_order = get_int(j, "quad_order", c.quad_order, 2, 32);
    c.T = get_number(j, "T", c.T);
    c.dt = get_number(j, "dt", c.dt);
    c.lambda_min = get_number(j, "lambda_min", c.lambda_min);
    c.lambda_max = get_number(j, "lambda_max", c.lambda_max);
    c.lambda_per_decade = get_int(j, "lambda_per_decade", c.lambda_per_decade, 1, 100000);
    c.eig_count = get_int(j, "eig_count", c.eig_count, 1, 100000);
    c.shift = get_pair(j, "shift", c.shift);
    c.initial = get_string(j, "initial", c.initial);
    c.output_dir = get_string(j, "output_dir", c.output_dir);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0))
            throw ValidationError("seed", "expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.fit_window = get_number(j, "fit_window", c.fit_window);

    // Model invariants first, so their messages name the model field.
    (void)physical_params(c);
    (void)geometry(c);
    if (!(c.T > 0.0)) throw ValidationError("T", "must be > 0");
    if (!(c.dt > 0.0)) throw ValidationError("dt", "must be > 0");
    if (c.dt > c.T) throw ValidationError("dt", "must not exceed T");
    if (c.T / c.dt > 1e8) throw ValidationError("dt", "T / dt exceeds 1e8 steps");
    if (!(c.lambda_min > 0.0)) throw ValidationError("lambda_min", "must be > 0");
    if (c.lambda_max < c.lambda_min) throw ValidationError("lambda_max", "must be >= lambda_min");
    if (c.initial != "velocity-bump" && c.initial != "displacement-bump")
        throw ValidationError("initial", "must be \"velocity-bump\" or \"displacement-bump\"");
    if (c.output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
    if (!(c.fit_window > 0.0 && c.fit_window <= 1.0)) throw ValidationError("fit_window", "must lie in (0, 1]");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number for the message.
        const std::size_t at = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    return parse_config(j);
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["rho"] = c.rho;
    j["beta"] = c.beta;
    j["mu"] = c.mu;
    j["r_interface"] = c.r_interface;
    j["r_outer"] = c.r_outer;
    j["x0"] = c.x0;
    j["modes"] = c.modes;
    j["n1"] = c.n1;
    j["n2"] = c.n2;
    j["quad_order"] = c.quad_order;
    j["T"] = c.T;
    j["dt"] = c.dt;
    j["lambda_min"] = c.lambda_min;
    j["lambda_max"] = c.lambda_max;
    j["lambda_per_decade"] = c.lambda_per_decade;
    j["eig_count"] = c.eig_count;
    j["shift"] = c.shift;
    j["initial"] = c.initial;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["fit_window"] = c.fit_window;
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : to_json(config).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

nlohmann::ordered_json module_versions() {
    return {{"model", kVersion},       {"assembly", kVersion}, {"dynamics", kVersion},
            {"spectral", kVersion},    {"diagnostics", kVersion}, {"cli", kVersion}};
}

std::string config_reference() {
    return "| key | default | constraint |\n"
           "|---|---|---|\n"
           "| rho | required | >= 0 |\n"
           "| beta | required | >= 0 |\n"
           "| mu | required | 0 < mu < 0.5 |\n"
           "| r_interface | 1 | > 0 |\n"
           "| r_outer | 2 | > r_interface |\n"
           "| x0 | [0, 0] | finite pair |\n"
           "| modes | [0, 1, 2] | distinct integers in [0, 256] |\n"
           "| n1 | 32 | annulus elements, [4, 4096] |\n"
           "| n2 | 32 | disk elements, [4, 4096] |\n"
           "| quad_order | 6 | Gauss points per element, [2, 32] |\n"
           "| T | 20 | > 0 |\n"
           "| dt | 0.01 | 0 < dt <= T |\n"
           "| lambda_min | 1 | > 0 |\n"
           "| lambda_max | 1000 | >= lambda_min |\n"
           "| lambda_per_decade | 64 | >= 1 |\n"
           "| eig_count | 10 | >= 1, eigenvalues per mode nearest the shift |\n"
           "| shift | [0, 0] | (re, im) |\n"
           "| initial | \"velocity-bump\" | or \"displacement-bump\" |\n"
           "| output_dir | \".\" | nonempty |\n"
           "| seed | 0 | unsigned 64-bit |\n"
           "| fit_window | 0.5 | trailing fraction of [0, T], (0, 1] |\n";
}

PhysicalParams physical_params(const ExperimentConfig& c) {
    return validate_params({c.rho, c.beta, c.mu});
}

AnnulusGeometry geometry(const ExperimentConfig& c) {
    return AnnulusGeometry(c.r_interface, c.r_outer, Eigen::Vector2d(c.x0[0], c.x0[1]));
}

Discretization discretization(const ExperimentConfig& c) {
    return {c.n1, c.n2, c.quad_order};
}

InitialKind initial_kind(const ExperimentConfig& c) {
    return c.initial == "displacement-bump" ? InitialKind::DisplacementBump : InitialKind::VelocityBump;
}

std::vector<ModeSystem> build_systems(const ExperimentConfig& config, int threads) {
    const PhysicalParams params = physical_params(config);
    const AnnulusGeometry geom = geometry(config);
    const Discretization disc = discretization(config);
    std::vector<std::optional<ModeSystem>> slots(config.modes.size());
    parallel_for(static_cast<int>(slots.size()), threads,
                 [&](int i) { slots[i].emplace(assemble_mode_system(params, geom, disc, config.modes[i])); });
    std::vector<ModeSystem> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace platemem
