#pragma once

#include "platemem/mode_system.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <optional>
#include <ostream>
#include <vector>

namespace platemem {

struct EnergyRecord {
    double total = 0.0;
    double plate_elastic = 0.0;
    double plate_kinetic = 0.0;
    double membrane_elastic = 0.0;
    double membrane_kinetic = 0.0;
};

/// Energy of a state: E = 1/2 (u^T K u + v^T Mv v) split by subdomain.
EnergyRecord energy(const ModeSystem& system, const StateVector& state);

/// rho |grad v1|^2 + beta |v2|^2, returned as a nonnegative rate.
double dissipation(const ModeSystem& system, const StateVector& state);

/// Crank-Nicolson / implicit midpoint map for M U' = B U in energy coordinates.
/// The matrix I - dt/2 A is factorised once.
class MidpointStepper {
public:
    MidpointStepper(const WhitenedPencil& pencil, double dt);

    Eigen::VectorXd advance(const Eigen::VectorXd& x) const;
    double dt() const noexcept { return dt_; }

private:
    const WhitenedPencil* pencil_;
    double dt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// One step of (M - dt/2 B) U+ = (M + dt/2 B) U.
Eigen::VectorXd step_implicit_midpoint(const WhitenedPencil& pencil, const Eigen::VectorXd& U, double dt);
StateVector step_implicit_midpoint(const ModeSystem& system, const StateVector& state, double dt);

struct EnergyTrace {
    std::vector<double> t;
    std::vector<EnergyRecord> energy;
    std::vector<double> dissipation;  // rate at t_n
    std::vector<double> F;            // <u1, v1> + <u2, v2>
    /// Dissipation at the midpoint of step n -> n+1 (size = t.size() - 1).
    std::vector<double> midpoint_dissipation;
    double graph_norm = 0.0;  // |A U0| in the energy norm

    std::size_t size() const { return t.size(); }
    double norm(std::size_t i) const;  // |U(t_i)| = sqrt(2 E)
};

enum class InitialKind { VelocityBump, DisplacementBump };

/// u or v set to the interpolant of (r_outer - r)^2 (r - r_interface)^2 on the
/// annulus and (r_interface^2 - r^2) r^m on the disk; both vanish on the interface.
StateVector default_initial_datum(const ModeSystem& system, InitialKind kind);

struct SimulationOptions {
    double T = 20.0;
    double dt = 0.01;
    int threads = 1;
};

/// Evolve each mode independently and sum the per-mode traces.
/// Optionally returns the per-mode traces.
EnergyTrace simulate(const std::vector<ModeSystem>& systems, const std::vector<StateVector>& initial,
                     const SimulationOptions& options, std::vector<EnergyTrace>* per_mode = nullptr);

/// Per-step relative defect of E(U+) - E(U) + dt * dissipation(midpoint).
std::vector<double> energy_identity_defects(const EnergyTrace& trace);

struct LyapunovReport {
    std::vector<double> F;
    std::optional<double> c5;  // smallest power of two in [1, 2^20] making c5 E + F non-increasing
};

LyapunovReport lyapunov_report(const EnergyTrace& trace, std::size_t begin = 0,
                               std::size_t end = static_cast<std::size_t>(-1));

struct RateFit {
    double rate = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
};

/// kappa from log E(t) ~ c - kappa t over [t_begin, t_end].
RateFit fit_exponential_rate(const EnergyTrace& trace, double t_begin, double t_end);
/// Same over the trailing `window` fraction of the horizon.
RateFit fit_exponential_rate(const EnergyTrace& trace, double window = 0.5);

struct PolynomialFit {
    double p = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
    /// sup over t in [1, T] of t^{1/30} |U(t)| / |A U0|.
    double certificate = 0.0;
};

/// p from log |U(t)| ~ c - p log t over the trailing `window` fraction.
PolynomialFit fit_polynomial_rate(const EnergyTrace& trace, double window = 0.5);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y ~ a + b x. R^2 is 1 for exactly linear data,
/// including constant y.
LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

void write_csv(std::ostream& out, const EnergyTrace& trace);

}  // namespace platemem
