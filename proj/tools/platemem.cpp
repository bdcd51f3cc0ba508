// Batch front-end: platemem <simulate|spectrum|resolvent|verify|config> --config FILE
#include "platemem/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

using namespace platemem;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out;
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "JSON experiment config")->required();
    cmd->add_option("--out", flags.out, "output directory (overrides output_dir)");
    cmd->add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1, 1024));
    cmd->add_option("--seed", flags.seed, "seed for randomized checks (overrides seed)");
}

int run(const std::string& command, const Flags& flags) {
    ExperimentConfig config = load_config(flags.config);
    if (flags.out) config.output_dir = *flags.out;
    if (flags.seed) config.seed = *flags.seed;
    const RunOptions options{config.output_dir, flags.threads};

    if (command == "config") {
        std::cout << to_json(config).dump(2) << "\n\n" << config_reference();
        return kExitOk;
    }
    if (command == "simulate") {
        const auto j = cmd_simulate(config, options);
        std::cout << "kappa " << j["kappa_fit"]["kappa"] << "  p " << j["p_fit"]["p"] << "  energy "
                  << j["monotonicity"]["energy"].get<std::string>() << '\n';
        return kExitOk;
    }
    if (command == "spectrum") {
        const auto j = cmd_spectrum(config, options);
        std::cout << "max Re " << j["max_real_part"] << "  min |Re| " << j["min_abs_real_part"] << '\n';
        return kExitOk;
    }
    if (command == "resolvent") {
        const auto j = cmd_resolvent(config, options);
        std::cout << "alpha " << j["alpha"] << "  R^2 " << j["r_squared"] << '\n';
        return kExitOk;
    }
    const VerifyReport report = cmd_verify(config, options);
    for (const VerifyCheck& c : report.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << '\n';
    if (report.passed()) return kExitOk;
    for (const std::string& name : report.failing()) std::cerr << "verify: invariant failed: " << name << '\n';
    return kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plate-membrane transmission simulator and stability analyzer"};
    app.require_subcommand(1);
    Flags flags;
    for (const char* name : {"simulate", "spectrum", "resolvent", "verify", "config"}) {
        const std::string help = std::string(name) == "config" ? "print the resolved config and key reference"
                                                               : std::string("run the ") + name + " experiment";
        add_flags(app.add_subcommand(name, help), flags);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
