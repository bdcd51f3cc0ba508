#include "platemem/dynamics.hpp"

#include "platemem/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace platemem {

namespace {

void check_state(const ModeSystem& system, const StateVector& state, const char* who) {
    if (state.coeffs.size() != system.n_state() || state.mode != system.mode)
        throw std::invalid_argument(std::string(who) + ": state does not match the mode system");
}

double quad(const Eigen::MatrixXd& A, const Eigen::VectorXd& x) { return x.dot(A * x); }

}  // namespace

EnergyRecord energy(const ModeSystem& system, const StateVector& state) {
    check_state(system, state, "energy");
    const Eigen::VectorXd u = state.u(), v = state.v();
    const Eigen::VectorXd u1 = system.annulus_part(u), v1 = system.annulus_part(v);
    const Eigen::VectorXd u2 = system.disk_part(u), v2 = system.disk_part(v);
    EnergyRecord e;
    e.plate_elastic = 0.5 * quad(system.plate, u1);
    e.plate_kinetic = 0.5 * quad(system.mass1, v1);
    e.membrane_elastic = 0.5 * quad(system.grad2, u2);
    e.membrane_kinetic = 0.5 * quad(system.mass2, v2);
    e.total = e.plate_elastic + e.plate_kinetic + e.membrane_elastic + e.membrane_kinetic;
    return e;
}

double dissipation(const ModeSystem& system, const StateVector& state) {
    check_state(system, state, "dissipation");
    const Eigen::VectorXd v = state.v();
    double d = 0.0;
    if (system.params.rho() > 0.0) d += system.params.rho() * quad(system.grad1, system.annulus_part(v));
    if (system.params.beta() > 0.0) d += system.params.beta() * quad(system.mass2, system.disk_part(v));
    return d;
}

MidpointStepper::MidpointStepper(const WhitenedPencil& pencil, double dt) : pencil_(&pencil), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("MidpointStepper: dt must be positive");
    const auto n = pencil.size();
    lu_.compute(Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * pencil.A);
    if (!std::isfinite(lu_.rcond()) || lu_.rcond() < 1e-14)
        throw NumericalError("MidpointStepper: I - dt/2 A is singular");
}

Eigen::VectorXd MidpointStepper::advance(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd& A = pencil_->A;
    const Eigen::VectorXd rhs = x + 0.5 * dt_ * (A * x);
    Eigen::VectorXd next = lu_.solve(rhs);
    // One refinement sweep keeps the step residual at roundoff level.
    const Eigen::VectorXd residual = rhs - (next - 0.5 * dt_ * (A * next));
    next += lu_.solve(residual);
    return next;
}

Eigen::VectorXd step_implicit_midpoint(const WhitenedPencil& pencil, const Eigen::VectorXd& U, double dt) {
    if (U.size() != pencil.size()) throw std::invalid_argument("step_implicit_midpoint: dimension mismatch");
    const MidpointStepper stepper(pencil, dt);
    return pencil.from_energy(stepper.advance(pencil.to_energy(U)));
}

StateVector step_implicit_midpoint(const ModeSystem& system, const StateVector& state, double dt) {
    check_state(system, state, "step_implicit_midpoint");
    return {state.mode, step_implicit_midpoint(system.whitened, state.coeffs, dt)};
}

double EnergyTrace::norm(std::size_t i) const { return std::sqrt(2.0 * std::max(energy[i].total, 0.0)); }

StateVector default_initial_datum(const ModeSystem& system, InitialKind kind) {
    const double ri = system.geometry.r_interface(), ro = system.geometry.r_outer();
    const int m = system.mode;
    const std::function<double(double)> f1 = [=](double r) { return (ro - r) * (ro - r) * (r - ri) * (r - ri); };
    const std::function<double(double)> df1 = [=](double r) {
        return -2.0 * (ro - r) * (r - ri) * (r - ri) + 2.0 * (ro - r) * (ro - r) * (r - ri);
    };
    const std::function<double(double)> f2 = [=](double r) { return (ri * ri - r * r) * std::pow(r, m); };
    const Eigen::VectorXd profile =
        system.from_parts(interpolate(system.annulus, f1, df1), interpolate(system.disk, f2));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(system.n_u());
    return kind == InitialKind::VelocityBump ? make_state(system, zero, profile) : make_state(system, profile, zero);
}

namespace {

EnergyTrace simulate_mode(const ModeSystem& system, const StateVector& initial, const SimulationOptions& options) {
    check_state(system, initial, "simulate");
    const auto steps = static_cast<std::size_t>(std::floor(options.T / options.dt + 1e-9));
    const WhitenedPencil& w = system.whitened;
    const MidpointStepper stepper(w, options.dt);
    const Eigen::MatrixXd S = w.symmetric_part();
    const int n_u = system.n_u();

    EnergyTrace trace;
    trace.t.reserve(steps + 1);
    trace.energy.reserve(steps + 1);
    trace.dissipation.reserve(steps + 1);
    trace.F.reserve(steps + 1);
    trace.midpoint_dissipation.reserve(steps);

    Eigen::VectorXd x = w.to_energy(initial.coeffs);
    trace.graph_norm = (w.A * x).norm();

    auto record = [&](std::size_t n, const Eigen::VectorXd& xn) {
        const StateVector state{system.mode, w.from_energy(xn)};
        EnergyRecord e = energy(system, state);
        e.total = 0.5 * xn.squaredNorm();
        trace.t.push_back(static_cast<double>(n) * options.dt);
        trace.energy.push_back(e);
        trace.dissipation.push_back(-xn.dot(S * xn));
        trace.F.push_back(state.coeffs.head(n_u).dot(system.Mv * state.coeffs.tail(n_u)));
    };

    record(0, x);
    for (std::size_t n = 1; n <= steps; ++n) {
        Eigen::VectorXd next = stepper.advance(x);
        const Eigen::VectorXd mid = 0.5 * (x + next);
        trace.midpoint_dissipation.push_back(-mid.dot(S * mid));
        x = std::move(next);
        record(n, x);
    }
    return trace;
}

}  // namespace

EnergyTrace simulate(const std::vector<ModeSystem>& systems, const std::vector<StateVector>& initial,
                     const SimulationOptions& options, std::vector<EnergyTrace>* per_mode) {
    if (systems.size() != initial.size()) throw std::invalid_argument("simulate: one initial state per mode required");
    if (systems.empty()) throw std::invalid_argument("simulate: no modes");
    if (!(options.T > 0.0)) throw std::invalid_argument("simulate: horizon T must be positive");
    if (!(options.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");

    std::vector<EnergyTrace> traces(systems.size());
    parallel_for(static_cast<int>(systems.size()), options.threads,
                 [&](int i) { traces[i] = simulate_mode(systems[i], initial[i], options); });

    EnergyTrace total = traces.front();
    double graph2 = total.graph_norm * total.graph_norm;
    for (std::size_t k = 1; k < traces.size(); ++k) {
        const EnergyTrace& tr = traces[k];
        for (std::size_t n = 0; n < total.size(); ++n) {
            EnergyRecord& e = total.energy[n];
            e.total += tr.energy[n].total;
            e.plate_elastic += tr.energy[n].plate_elastic;
            e.plate_kinetic += tr.energy[n].plate_kinetic;
            e.membrane_elastic += tr.energy[n].membrane_elastic;
            e.membrane_kinetic += tr.energy[n].membrane_kinetic;
            total.dissipation[n] += tr.dissipation[n];
            total.F[n] += tr.F[n];
        }
        for (std::size_t n = 0; n < total.midpoint_dissipation.size(); ++n)
            total.midpoint_dissipation[n] += tr.midpoint_dissipation[n];
        graph2 += tr.graph_norm * tr.graph_norm;
    }
    total.graph_norm = std::sqrt(graph2);
    if (per_mode) *per_mode = std::move(traces);
    return total;
}

std::vector<double> energy_identity_defects(const EnergyTrace& trace) {
    std::vector<double> defects;
    if (trace.size() < 2) return defects;
    defects.reserve(trace.size() - 1);
    for (std::size_t n = 0; n + 1 < trace.size(); ++n) {
        const double dt = trace.t[n + 1] - trace.t[n];
        const double e0 = trace.energy[n].total, e1 = trace.energy[n + 1].total;
        const double defect = e1 - e0 + dt * trace.midpoint_dissipation[n];
        defects.push_back(e0 > 0.0 ? std::abs(defect) / e0 : std::abs(defect));
    }
    return defects;
}

LyapunovReport lyapunov_report(const EnergyTrace& trace, std::size_t begin, std::size_t end) {
    end = std::min(end, trace.size());
    LyapunovReport report;
    report.F.assign(trace.F.begin() + static_cast<std::ptrdiff_t>(std::min(begin, end)),
                    trace.F.begin() + static_cast<std::ptrdiff_t>(end));
    for (int k = 0; k <= 20; ++k) {
        const double c5 = std::ldexp(1.0, k);
        bool monotone = true;
        for (std::size_t n = begin; n + 1 < end && monotone; ++n) {
            const double L0 = c5 * trace.energy[n].total + trace.F[n];
            const double L1 = c5 * trace.energy[n + 1].total + trace.F[n + 1];
            const double slack = 1e-12 * (c5 * trace.energy[n].total + std::abs(trace.F[n]));
            monotone = L1 <= L0 + slack;
        }
        if (monotone) {
            report.c5 = c5;
            break;
        }
    }
    return report;
}

LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw NumericalError("least_squares_line: need at least two paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw NumericalError("least_squares_line: abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss_res += r * r;
    }
    // Relative floor: a constant series leaves only roundoff in syy.
    const double scale = std::max(1.0, my * my) * static_cast<double>(n);
    fit.r_squared = syy <= 1e-28 * scale ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

namespace {

constexpr std::size_t kMinFitSamples = 20;

void check_datum(const EnergyTrace& trace) {
    if (trace.size() == 0) throw NumericalError("decay fit: empty trace");
    if (!(trace.energy.front().total > 0.0)) throw NumericalError("decay fit: zero datum");
}

}  // namespace

RateFit fit_exponential_rate(const EnergyTrace& trace, double t_begin, double t_end) {
    check_datum(trace);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.t[i] < t_begin - 1e-12 || trace.t[i] > t_end + 1e-12) continue;
        const double e = trace.energy[i].total;
        if (!(e > 0.0)) throw NumericalError("decay fit: nonpositive energy in window");
        x.push_back(trace.t[i]);
        y.push_back(std::log(e));
    }
    if (x.size() < kMinFitSamples) throw NumericalError("decay fit: fewer than 20 samples in window");
    const LinearFit line = least_squares_line(x, y);
    return {-line.slope, line.r_squared, x.size()};
}

RateFit fit_exponential_rate(const EnergyTrace& trace, double window) {
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("fit_exponential_rate: window must be in (0, 1]");
    if (trace.size() == 0) throw NumericalError("decay fit: empty trace");
    const double T = trace.t.back();
    return fit_exponential_rate(trace, T * (1.0 - window), T);
}

PolynomialFit fit_polynomial_rate(const EnergyTrace& trace, double window) {
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("fit_polynomial_rate: window must be in (0, 1]");
    check_datum(trace);
    if (!(trace.graph_norm > 0.0)) throw NumericalError("decay fit: zero datum (|A U0| = 0)");
    const double T = trace.t.back();
    const double t0 = std::max(T * (1.0 - window), 1e-12);
    std::vector<double> x, y;
    PolynomialFit fit;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.t[i];
        if (t >= 1.0)
            fit.certificate = std::max(fit.certificate, std::pow(t, 1.0 / 30.0) * trace.norm(i) / trace.graph_norm);
        if (t < t0 - 1e-12 || t <= 0.0) continue;
        const double nu = trace.norm(i);
        if (!(nu > 0.0)) throw NumericalError("decay fit: nonpositive energy in window");
        x.push_back(std::log(t));
        y.push_back(std::log(nu));
    }
    if (x.size() < kMinFitSamples) throw NumericalError("decay fit: fewer than 20 samples in window");
    const LinearFit line = least_squares_line(x, y);
    fit.p = -line.slope;
    fit.r_squared = line.r_squared;
    fit.samples = x.size();
    return fit;
}

void write_csv(std::ostream& out, const EnergyTrace& trace) {
    out << "t,E_total,E_plate_el,E_plate_kin,E_mem_el,E_mem_kin,dissipation,F\n";
    char buf[512];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const EnergyRecord& e = trace.energy[i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", trace.t[i], e.total,
                      e.plate_elastic, e.plate_kinetic, e.membrane_elastic, e.membrane_kinetic, trace.dissipation[i],
                      trace.F[i]);
        out << buf;
    }
}

}  // namespace platemem
