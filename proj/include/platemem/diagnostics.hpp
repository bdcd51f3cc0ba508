#pragma once

#include "platemem/mode_system.hpp"

#include <functional>
#include <ostream>
#include <random>
#include <vector>

namespace platemem {

/// Smooth radial profile f with its derivative (the derivative is only needed
/// to interpolate into the Hermite space).
struct RadialProfile {
    std::function<double(double)> f;
    std::function<double(double)> df;
};

enum class FormKind { Plate, Grad, Mass };

struct OracleValue {
    double value = 0.0;
    double error_estimate = 0.0;  // quadrature + finite-difference estimate
};

struct OracleForms {
    OracleValue plate, grad, mass;
};

struct OracleGrid {
    int n_r = 512;
    int n_theta = 512;
};

/// Brute-force 2D evaluation of the forms for u(x, y) = f(r) cos(m theta) on
/// inner < r < outer. Cartesian derivatives of u come from central differences
/// in x and y; the integral uses Gauss-Legendre in r times the trapezoid rule
/// in theta, then is divided by the angular factor (2 pi for m = 0, pi else).
OracleForms cartesian_oracle_forms(const RadialProfile& profile, int m, double mu, double inner, double outer,
                                   const OracleGrid& grid = {}, double tolerance = 0.0);
double cartesian_oracle_form(const RadialProfile& profile, int m, double mu, FormKind which, double inner,
                             double outer, const OracleGrid& grid = {});

/// Random smooth annulus profile: a sum of three cosines with frequencies in
/// [1, 3] and random phases.
RadialProfile random_annulus_profile(std::mt19937_64& rng);
/// Random smooth disk profile r^m g(r) with g even, so u is smooth at the origin.
RadialProfile random_disk_profile(std::mt19937_64& rng, int m);

struct FormCheck {
    FormKind kind = FormKind::Mass;
    DomainKind domain = DomainKind::Annulus;
    double assembled = 0.0;            // form of the interpolant at n elements
    double oracle = 0.0;
    double oracle_error = 0.0;         // oracle's own estimate
    double interpolation_error = 0.0;  // |value(n) - value(2n)|

    double relative_difference() const;
    /// |assembled - oracle| <= 2 (oracle_error + interpolation_error), with a
    /// 1e-12 relative floor.
    bool within_estimate() const;
};

/// Assembled forms of the interpolant of `profile` on [inner, outer] against
/// the Cartesian oracle: plate, grad and mass on an annulus, grad and mass on
/// a disk (inner = 0).
std::vector<FormCheck> check_forms_against_oracle(const RadialProfile& profile, int m, double mu, DomainKind domain,
                                                  double inner, double outer, int n_elements,
                                                  const OracleGrid& grid = {}, int quad_points = 6);

/// k-th positive zero of J_order, bracketed by sign change and bisected to
/// machine precision.
double bessel_zero(int order, int index);

struct TraceResidualReport {
    double continuity = 0.0;     // |u1 - u2| at r_interface
    double b1 = 0.0;             // |B1 u1| at r_interface
    double b2 = 0.0;             // |B2 u1 - rho d_nu v1 + d_nu u2| at r_interface
    double clamped_value = 0.0;  // |u1| at r_outer
    double clamped_slope = 0.0;  // |d_r u1| at r_outer
    double h = 0.0;              // annulus element size
};

/// Strong-form transmission residuals of a discrete state, with derivatives
/// taken by one-sided 5-point finite differences (step = element size) of the
/// discrete solution. nu = -e_r on the interface.
TraceResidualReport transmission_residuals(const ModeSystem& system, const StateVector& state);

struct EigenCheck {
    double computed = 0.0;
    double oracle = 0.0;
    double relative_error = 0.0;
};

/// Lowest k Dirichlet eigenvalues of the disk block (interface DOF clamped)
/// against (j_{m,k} / r_interface)^2.
std::vector<EigenCheck> disk_dirichlet_eigencheck(int n2, int m, int k, double r_interface = 1.0,
                                                  int quad_points = 6);

/// Smooth load F = (f, g) in the constrained space used for refinement
/// studies of the static problem.
StateVector smooth_static_load(const ModeSystem& system);

struct RefinementRow {
    double h = 0.0;
    double residual_b1 = 0.0;
    double residual_b2 = 0.0;
    double eig_err = 0.0;
};

void write_json(std::ostream& out, const TraceResidualReport& report);
void write_csv(std::ostream& out, const std::vector<RefinementRow>& rows);

}  // namespace platemem
