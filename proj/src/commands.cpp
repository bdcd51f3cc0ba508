#include "platemem/commands.hpp"

#include "platemem/diagnostics.hpp"
#include "platemem/dynamics.hpp"
#include "platemem/parallel.hpp"
#include "platemem/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <random>

namespace platemem {

namespace {

using nlohmann::ordered_json;

std::ofstream open_output(const RunOptions& options, const std::string& name) {
    std::filesystem::create_directories(options.out_dir);
    const auto path = options.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

void write_json_file(const RunOptions& options, const std::string& name, const ordered_json& j) {
    auto out = open_output(options, name);
    out << j.dump(2) << '\n';
}

std::vector<StateVector> initial_data(const std::vector<ModeSystem>& systems, InitialKind kind) {
    std::vector<StateVector> out;
    for (const ModeSystem& s : systems) out.push_back(default_initial_datum(s, kind));
    return out;
}

double max_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

// Nonfinite values become JSON null, so keep them out of numeric fields.
ordered_json number(double x) {
    return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr);
}

}  // namespace

ordered_json summary_header(const ExperimentConfig& config, const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    j["versions"] = module_versions();
    j["config"] = to_json(config);
    j["modes"] = config.modes;
    j["truncated"] = true;  // every result is restricted to the configured modes
    const RegimeInfo regime = damping_regime(physical_params(config));
    j["regime"] = std::string(to_string(regime.regime));
    j["expected_decay"] = std::string(to_string(regime.expected));
    return j;
}

std::string energy_monotonicity(const EnergyTrace& trace) {
    if (trace.size() == 0) return "constant";
    const double e0 = trace.energy.front().total;
    double drift = 0.0;
    bool increasing = false;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        drift = std::max(drift, std::abs(trace.energy[i].total - e0));
        if (i > 0 && trace.energy[i].total > trace.energy[i - 1].total + 1e-12 * e0) increasing = true;
    }
    if (drift <= 1e-10 * e0) return "constant";
    return increasing ? "increasing" : "nonincreasing";
}

ordered_json cmd_simulate(const ExperimentConfig& config, const RunOptions& options) {
    const auto systems = build_systems(config, options.threads);
    const EnergyTrace trace =
        simulate(systems, initial_data(systems, initial_kind(config)), {config.T, config.dt, options.threads});
    {
        auto out = open_output(options, "energy.csv");
        write_csv(out, trace);
    }

    ordered_json j = summary_header(config, "simulate");
    j["steps"] = trace.size() - 1;
    j["energy_initial"] = trace.energy.front().total;
    j["energy_final"] = trace.energy.back().total;
    j["max_identity_defect"] = max_of(energy_identity_defects(trace));
    j["graph_norm"] = trace.graph_norm;

    const double t_end = trace.t.back();
    const double t_begin = t_end * (1.0 - config.fit_window);
    const RateFit kappa = fit_exponential_rate(trace, t_begin, t_end);
    j["kappa_fit"] = {{"kappa", kappa.rate}, {"r_squared", kappa.r_squared},
                      {"window", {t_begin, t_end}}, {"samples", kappa.samples}};
    const PolynomialFit p = fit_polynomial_rate(trace, config.fit_window);
    j["p_fit"] = {{"p", p.p}, {"r_squared", p.r_squared}, {"samples", p.samples}};
    j["certificate"] = p.certificate;

    const LyapunovReport lyapunov = lyapunov_report(trace);
    j["monotonicity"] = {{"energy", energy_monotonicity(trace)},
                         {"lyapunov_nonincreasing", lyapunov.c5.has_value()},
                         {"c5", lyapunov.c5 ? ordered_json(*lyapunov.c5) : ordered_json(nullptr)}};
    write_json_file(options, "simulate_summary.json", j);
    return j;
}

ordered_json cmd_spectrum(const ExperimentConfig& config, const RunOptions& options) {
    const auto systems = build_systems(config, options.threads);
    const Complex shift(config.shift[0], config.shift[1]);
    std::vector<std::optional<SpectrumReport>> near(systems.size()), full(systems.size());
    parallel_for(static_cast<int>(systems.size()), options.threads, [&](int k) {
        near[k].emplace(eigenvalues_near(systems[k], shift, config.eig_count));
        full[k].emplace(spectrum(systems[k]));
    });

    SpectrumReport listed;
    ordered_json per_mode = ordered_json::array();
    SpectrumReport all;
    for (std::size_t k = 0; k < systems.size(); ++k) {
        for (EigenPair& p : near[k]->pairs) listed.pairs.push_back(std::move(p));
        listed.nonconverged += near[k]->nonconverged;
        const SpectrumReport& f = *full[k];
        per_mode.push_back({{"mode", systems[k].mode},
                            {"size", f.pairs.size()},
                            {"max_real_part", f.max_real_part},
                            {"min_abs_real_part", f.min_abs_real_part},
                            {"imaginary_axis_hit", f.imaginary_axis_hit},
                            {"nonconverged", f.nonconverged}});
        for (const EigenPair& p : f.pairs) all.pairs.push_back({p.value, p.residual, p.mode, {}});
        all.nonconverged += f.nonconverged;
    }
    summarize(all);
    {
        auto out = open_output(options, "spectrum.json");
        write_json(out, listed);
    }

    ordered_json j = summary_header(config, "spectrum");
    j["shift"] = config.shift;
    j["eig_count"] = config.eig_count;
    j["listed_nonconverged"] = listed.nonconverged;
    j["max_real_part"] = all.max_real_part;
    j["min_abs_real_part"] = all.min_abs_real_part;
    j["imaginary_axis_hit"] = all.imaginary_axis_hit;
    j["axis_tolerance"] = 1e-9;
    j["nonconverged"] = all.nonconverged;
    j["per_mode"] = per_mode;
    write_json_file(options, "spectrum_summary.json", j);
    return j;
}

ordered_json cmd_resolvent(const ExperimentConfig& config, const RunOptions& options) {
    const auto systems = build_systems(config, options.threads);
    const auto grid = resonance_grid(systems, config.lambda_min, config.lambda_max, config.lambda_per_decade);
    const auto samples = sweep_resolvent(systems, grid, options.threads);
    {
        auto out = open_output(options, "resolvent.csv");
        write_csv(out, samples);
    }
    const auto flagged = std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.flagged; });
    const auto envelope = running_maximum(samples);
    if (envelope.size() < 5)
        throw NumericalError("growth exponent fit needs at least 5 unflagged samples, grid gave " +
                             std::to_string(envelope.size()));
    const GrowthFit fit = estimate_growth_exponent(envelope);

    ordered_json j = summary_header(config, "resolvent");
    j["grid"] = {{"lambda_min", config.lambda_min}, {"lambda_max", config.lambda_max},
                 {"per_decade", config.lambda_per_decade}, {"points", grid.size()}};
    j["flagged"] = flagged;
    j["max_norm"] = number(envelope.back().norm);
    j["alpha"] = fit.alpha;
    j["r_squared"] = fit.r_squared;
    j["samples"] = fit.samples;
    j["certified_ceiling"] = GrowthFit::certified_ceiling;
    j["within_ceiling"] = fit.alpha <= GrowthFit::certified_ceiling;
    ordered_json octaves = ordered_json::array();
    for (const ResolventSample& s : octave_maxima(envelope))
        octaves.push_back({{"lambda", s.lambda}, {"running_max", s.norm}, {"mode_argmax", s.mode_argmax}});
    j["octave_running_max"] = octaves;
    write_json_file(options, "resolvent_fit.json", j);
    return j;
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::vector<std::string> VerifyReport::failing() const {
    std::vector<std::string> out;
    for (const VerifyCheck& c : checks)
        if (!c.passed) out.push_back(c.name);
    return out;
}

ordered_json VerifyReport::to_json() const {
    ordered_json arr = ordered_json::array();
    for (const VerifyCheck& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"passed", passed()}, {"failing", failing()}, {"checks", arr}};
}

namespace {

VerifyCheck check_assembly(const std::vector<ModeSystem>& systems) {
    VerifyCheck c{"assembly_symmetry_dissipativity", true, ordered_json::array()};
    for (const ModeSystem& s : systems) {
        const bool symmetric = s.K == s.K.transpose() && s.Mv == s.Mv.transpose() && s.D == s.D.transpose();
        const bool k_pd = Eigen::LLT<Eigen::MatrixXd>(s.K).info() == Eigen::Success;
        const bool m_pd = Eigen::LLT<Eigen::MatrixXd>(s.Mv).info() == Eigen::Success;
        const Eigen::MatrixXd sym = s.whitened.symmetric_part();
        const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
        const double scale = std::max(1.0, s.whitened.A.cwiseAbs().colwise().sum().maxCoeff());
        const bool dissipative = top <= 1e-12 * scale;
        c.passed = c.passed && symmetric && k_pd && m_pd && dissipative;
        c.detail.push_back({{"mode", s.mode},
                            {"symmetric", symmetric},
                            {"stiffness_positive_definite", k_pd},
                            {"mass_positive_definite", m_pd},
                            {"max_eig_sym_A", top}});
    }
    return c;
}

VerifyCheck check_energy_identity(const ExperimentConfig& config, const std::vector<ModeSystem>& systems,
                                  int threads) {
    const double T = std::min(config.T, 1000 * config.dt);
    const EnergyTrace trace = simulate(systems, initial_data(systems, initial_kind(config)), {T, config.dt, threads});
    const double worst = max_of(energy_identity_defects(trace));
    return {"energy_identity", worst <= 1e-11, {{"steps", trace.size() - 1}, {"max_relative_defect", worst},
                                                {"tolerance", 1e-11}}};
}

VerifyCheck check_oracle(const ExperimentConfig& config, int threads) {
    // Two random profiles per configured mode, annulus and disk.
    struct Job {
        int m;
        DomainKind domain;
        RadialProfile profile;
    };
    std::mt19937_64 rng(config.seed);
    std::vector<Job> jobs;
    for (int m : config.modes)
        for (int k = 0; k < 2; ++k) {
            jobs.push_back({m, DomainKind::Annulus, random_annulus_profile(rng)});
            jobs.push_back({m, DomainKind::Disk, random_disk_profile(rng, m)});
        }
    std::vector<std::vector<FormCheck>> results(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), threads, [&](int i) {
        const Job& job = jobs[i];
        const bool annulus = job.domain == DomainKind::Annulus;
        results[i] = check_forms_against_oracle(job.profile, job.m, config.mu, job.domain,
                                                annulus ? config.r_interface : 0.0,
                                                annulus ? config.r_outer : config.r_interface,
                                                annulus ? config.n1 : config.n2, {256, 256}, config.quad_order);
    });
    VerifyCheck c{"oracle_equivalence", true, ordered_json::array()};
    static constexpr const char* kNames[] = {"plate", "grad", "mass"};
    for (std::size_t i = 0; i < jobs.size(); ++i)
        for (const FormCheck& f : results[i]) {
            c.passed = c.passed && f.within_estimate();
            c.detail.push_back({{"mode", jobs[i].m},
                                {"domain", jobs[i].domain == DomainKind::Annulus ? "annulus" : "disk"},
                                {"form", kNames[static_cast<int>(f.kind)]},
                                {"relative_difference", f.relative_difference()},
                                {"oracle_error", f.oracle_error},
                                {"interpolation_error", f.interpolation_error},
                                {"within_estimate", f.within_estimate()}});
        }
    return c;
}

VerifyCheck check_eigen_convergence(const ExperimentConfig& config, std::vector<double>* eig_err) {
    VerifyCheck c{"eigenvalue_convergence", true, ordered_json::array()};
    for (int m : {0, 1}) {
        std::vector<double> err;
        for (int level = 0; level < 3; ++level)
            err.push_back(disk_dirichlet_eigencheck(config.n2 << level, m, 1, config.r_interface, config.quad_order)
                              .front()
                              .relative_error);
        const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
        const bool ok = std::abs(o1 - 2.0) <= 0.3 && std::abs(o2 - 2.0) <= 0.3;
        c.passed = c.passed && ok;
        c.detail.push_back({{"mode", m}, {"relative_errors", err}, {"orders", {o1, o2}}});
        if (m == 0 && eig_err) *eig_err = err;
    }
    return c;
}

struct TraceStudy {
    VerifyCheck refinement, static_residual;
    std::vector<RefinementRow> rows;
    std::optional<TraceResidualReport> base;
};

TraceStudy study_traces(const ExperimentConfig& config, const std::vector<double>& eig_err, int threads) {
    const PhysicalParams params = physical_params(config);
    const AnnulusGeometry geom = geometry(config);
    const int levels = 3;
    const auto n_modes = config.modes.size();
    std::vector<std::optional<TraceResidualReport>> reports(n_modes * levels);
    std::vector<double> residuals(n_modes * levels);
    parallel_for(static_cast<int>(reports.size()), threads, [&](int i) {
        const int level = i % levels;
        const Discretization disc{config.n1 << level, config.n2 << level, config.quad_order};
        const ModeSystem sys = assemble_mode_system(params, geom, disc, config.modes[i / levels]);
        const StaticSolution sol = static_solve(sys, smooth_static_load(sys));
        residuals[i] = sol.residual;
        reports[i].emplace(transmission_residuals(sys, sol.U));
    });

    TraceStudy study{{"trace_residual_refinement", true, ordered_json::array()},
                     {"static_solve_residual", true, ordered_json::array()},
                     {},
                     {}};
    for (std::size_t k = 0; k < n_modes; ++k) {
        ordered_json b1 = ordered_json::array(), b2 = ordered_json::array();
        bool ok = true;
        double exact = 0.0;
        for (int level = 0; level < levels; ++level) {
            const TraceResidualReport& r = *reports[k * levels + level];
            b1.push_back(r.b1);
            b2.push_back(r.b2);
            exact = std::max({exact, r.continuity, r.clamped_value, r.clamped_slope});
            if (level > 0) {
                const TraceResidualReport& prev = *reports[k * levels + level - 1];
                ok = ok && r.b1 < prev.b1 && r.b2 < prev.b2;
            }
        }
        ok = ok && exact <= 1e-14;
        study.refinement.passed = study.refinement.passed && ok;
        study.refinement.detail.push_back({{"mode", config.modes[k]}, {"b1", b1}, {"b2", b2},
                                           {"max_continuity_clamped", exact}, {"monotone", ok}});

        const double res = residuals[k * levels];
        study.static_residual.passed = study.static_residual.passed && res <= 1e-10;
        study.static_residual.detail.push_back({{"mode", config.modes[k]}, {"residual", res}, {"tolerance", 1e-10}});
    }
    for (int level = 0; level < levels; ++level) {
        const TraceResidualReport& r = *reports[level];  // first configured mode
        study.rows.push_back({r.h, r.b1, r.b2, level < static_cast<int>(eig_err.size()) ? eig_err[level] : 0.0});
    }
    study.base = *reports[0];
    return study;
}

VerifyCheck check_geometry(const ExperimentConfig& config) {
    const GeometricCondition g = check_geometric_condition(geometry(config));
    return {"geometric_condition", g.satisfied, {{"max_q_dot_nu", g.max_q_dot_nu}, {"x0", config.x0}}};
}

}  // namespace

VerifyReport cmd_verify(const ExperimentConfig& config, const RunOptions& options) {
    const auto systems = build_systems(config, options.threads);
    VerifyReport report;
    report.checks.push_back(check_assembly(systems));
    report.checks.push_back(check_energy_identity(config, systems, options.threads));
    report.checks.push_back(check_oracle(config, options.threads));
    std::vector<double> eig_err;
    report.checks.push_back(check_eigen_convergence(config, &eig_err));
    TraceStudy traces = study_traces(config, eig_err, options.threads);
    report.checks.push_back(std::move(traces.refinement));
    report.checks.push_back(std::move(traces.static_residual));
    report.checks.push_back(check_geometry(config));

    {
        auto out = open_output(options, "refinement.csv");
        write_csv(out, traces.rows);
    }
    {
        auto out = open_output(options, "trace_residuals.json");
        write_json(out, *traces.base);
    }
    ordered_json j = summary_header(config, "verify");
    j.update(report.to_json());
    write_json_file(options, "verify.json", j);
    return report;
}

}  // namespace platemem
