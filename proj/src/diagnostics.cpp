#include "platemem/diagnostics.hpp"

#include "platemem/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace platemem {

namespace {

struct FormSums {
    double plate = 0.0, grad = 0.0, mass = 0.0;
};

// u(x, y) = f(r) cos(m theta), evaluated in Cartesian coordinates.
struct CartesianField {
    const RadialProfile* profile;
    int m;
    double operator()(double x, double y) const {
        const double r = std::hypot(x, y);
        const double theta = std::atan2(y, x);
        return profile->f(r) * std::cos(m * theta);
    }
};

FormSums integrate_forms(const CartesianField& u, double mu, double inner, double outer, int n_r, int n_theta,
                         double step) {
    const auto rule = gauss_legendre<double>(n_r);
    const double dtheta = 2.0 * std::numbers::pi / n_theta;
    const double width = outer - inner;
    FormSums sum;
    for (int i = 0; i < n_r; ++i) {
        const double r = inner + width * rule.points(i);
        const double wr = rule.weights(i) * width * r * dtheta;
        FormSums ring;
        for (int j = 0; j < n_theta; ++j) {
            const double theta = j * dtheta;
            const double x = r * std::cos(theta), y = r * std::sin(theta);
            const double c = u(x, y);
            const double xp = u(x + step, y), xm = u(x - step, y);
            const double yp = u(x, y + step), ym = u(x, y - step);
            const double uxx = (xp - 2.0 * c + xm) / (step * step);
            const double uyy = (yp - 2.0 * c + ym) / (step * step);
            const double uxy =
                (u(x + step, y + step) - u(x + step, y - step) - u(x - step, y + step) + u(x - step, y - step)) /
                (4.0 * step * step);
            const double ux = (xp - xm) / (2.0 * step), uy = (yp - ym) / (2.0 * step);
            const double lap = uxx + uyy;
            ring.plate += mu * lap * lap + (1.0 - mu) * (uxx * uxx + uyy * uyy + 2.0 * uxy * uxy);
            ring.grad += ux * ux + uy * uy;
            ring.mass += c * c;
        }
        sum.plate += wr * ring.plate;
        sum.grad += wr * ring.grad;
        sum.mass += wr * ring.mass;
    }
    return sum;
}

}  // namespace

OracleForms cartesian_oracle_forms(const RadialProfile& profile, int m, double mu, double inner, double outer,
                                   const OracleGrid& grid, double tolerance) {
    if (m < 0) throw std::invalid_argument("cartesian_oracle_forms: negative mode");
    if (!(outer > inner) || inner < 0.0) throw std::invalid_argument("cartesian_oracle_forms: bad radial interval");
    if (grid.n_r < 8 || grid.n_theta < 8 || grid.n_theta < 4 * (m + 1))
        throw std::invalid_argument("cartesian_oracle_forms: grid too coarse");
    const CartesianField u{&profile, m};
    const double step = 1e-3 * outer;
    const FormSums fine = integrate_forms(u, mu, inner, outer, grid.n_r, grid.n_theta, step);
    const FormSums coarse = integrate_forms(u, mu, inner, outer, grid.n_r / 2, grid.n_theta / 2, step);
    const FormSums wide = integrate_forms(u, mu, inner, outer, grid.n_r / 2, grid.n_theta / 2, 2.0 * step);
    const double norm = m == 0 ? 2.0 * std::numbers::pi : std::numbers::pi;

    // Quadrature error from the half-resolution grid, difference error from
    // Richardson on the step (second-order stencils).
    auto make = [&](double f, double c, double w) {
        OracleValue v;
        v.value = f / norm;
        v.error_estimate = (std::abs(f - c) + std::abs(c - w) / 3.0) / norm;
        return v;
    };
    OracleForms out{make(fine.plate, coarse.plate, wide.plate), make(fine.grad, coarse.grad, wide.grad),
                    make(fine.mass, coarse.mass, wide.mass)};
    if (tolerance > 0.0) {
        for (const OracleValue* v : {&out.plate, &out.grad, &out.mass})
            if (v->error_estimate > tolerance * std::max(std::abs(v->value), 1e-300))
                throw std::runtime_error("cartesian_oracle_forms: estimated error exceeds requested tolerance");
    }
    return out;
}

double cartesian_oracle_form(const RadialProfile& profile, int m, double mu, FormKind which, double inner,
                             double outer, const OracleGrid& grid) {
    const OracleForms forms = cartesian_oracle_forms(profile, m, mu, inner, outer, grid);
    switch (which) {
        case FormKind::Plate: return forms.plate.value;
        case FormKind::Grad: return forms.grad.value;
        case FormKind::Mass: return forms.mass.value;
    }
    return 0.0;
}

double bessel_zero(int order, int index) {
    if (order < 0 || order > 10 || index < 1 || index > 10)
        throw std::invalid_argument("bessel_zero: supports order 0..10 and index 1..10");
    auto J = [order](double x) { return std::cyl_bessel_j(static_cast<double>(order), x); };
    const double scan = 0.05;
    double a = 0.5 * scan;  // J_order(x) != 0 for 0 < x < first zero
    double fa = J(a);
    int found = 0;
    for (double b = a + scan; b < 100.0; b += scan) {
        const double fb = J(b);
        if ((fa < 0.0) != (fb < 0.0) && ++found == index) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = J(mid);
                if (fm == 0.0) return mid;
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            if (hi - lo > 1e-12) throw NumericalError("bessel_zero: bisection did not reach 1e-12");
            return 0.5 * (lo + hi);
        }
        a = b;
        fa = fb;
    }
    throw NumericalError("bessel_zero: bracketing failed");
}

RadialProfile random_annulus_profile(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::array<double, 3> c{}, w{}, phi{};
    for (int k = 0; k < 3; ++k) {
        c[k] = unit(rng);
        w[k] = 2.0 + unit(rng);
        phi[k] = std::numbers::pi * unit(rng);
    }
    return {[=](double r) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += c[k] * std::cos(w[k] * r + phi[k]);
                return s;
            },
            [=](double r) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s -= c[k] * w[k] * std::sin(w[k] * r + phi[k]);
                return s;
            }};
}

RadialProfile random_disk_profile(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::array<double, 3> c{}, w{};
    for (int k = 0; k < 3; ++k) {
        c[k] = unit(rng);
        w[k] = 2.0 + unit(rng);
    }
    return {[=](double r) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += c[k] * std::cos(w[k] * r);
                return std::pow(r, m) * s;
            },
            [=](double r) {
                double s = 0.0, ds = 0.0;
                for (int k = 0; k < 3; ++k) {
                    s += c[k] * std::cos(w[k] * r);
                    ds -= c[k] * w[k] * std::sin(w[k] * r);
                }
                const double rm = std::pow(r, m);
                return rm * ds + (m > 0 ? m * std::pow(r, m - 1) * s : 0.0);
            }};
}

double FormCheck::relative_difference() const {
    return std::abs(assembled - oracle) / std::max(std::abs(oracle), 1e-300);
}

bool FormCheck::within_estimate() const {
    return std::abs(assembled - oracle) <= 2.0 * (oracle_error + interpolation_error) + 1e-12 * std::abs(oracle);
}

std::vector<FormCheck> check_forms_against_oracle(const RadialProfile& profile, int m, double mu, DomainKind domain,
                                                  double inner, double outer, int n_elements, const OracleGrid& grid,
                                                  int quad_points) {
    const OracleForms oracle = cartesian_oracle_forms(profile, m, mu, inner, outer, grid);
    auto values = [&](int n) {
        RadialMesh mesh = build_radial_mesh(domain, inner, outer, n, quad_points);
        if (domain == DomainKind::Disk) mesh.keep_origin = (m == 0);
        const Eigen::VectorXd c = interpolate(mesh, profile.f, profile.df);
        std::array<double, 3> v{};
        if (domain == DomainKind::Annulus) v[0] = c.dot(assemble_plate_form(mesh, m, mu) * c);
        v[1] = c.dot(assemble_grad_form(mesh, m) * c);
        v[2] = c.dot(assemble_mass(mesh) * c);
        return v;
    };
    const auto coarse = values(n_elements), fine = values(2 * n_elements);
    const std::array<const OracleValue*, 3> ref{&oracle.plate, &oracle.grad, &oracle.mass};
    const std::array<FormKind, 3> kinds{FormKind::Plate, FormKind::Grad, FormKind::Mass};
    std::vector<FormCheck> out;
    for (int i = domain == DomainKind::Annulus ? 0 : 1; i < 3; ++i)
        out.push_back({kinds[i], domain, coarse[i], ref[i]->value, ref[i]->error_estimate,
                       std::abs(coarse[i] - fine[i])});
    return out;
}

namespace {

// One-sided 5-point derivatives at s = 0 from samples f(k delta), k = 0..4;
// a negative delta gives the backward stencils.
struct OneSided {
    double d1, d2, d3;
};

OneSided one_sided(const std::array<double, 5>& f, double delta) {
    OneSided d;
    d.d1 = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * delta);
    d.d2 = (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]) / (12.0 * delta * delta);
    d.d3 = (-5.0 * f[0] + 18.0 * f[1] - 24.0 * f[2] + 14.0 * f[3] - 3.0 * f[4]) / (2.0 * delta * delta * delta);
    return d;
}

std::array<double, 5> samples(const RadialMesh& mesh, const Eigen::VectorXd& c, double r0, double delta) {
    std::array<double, 5> f{};
    for (int k = 0; k < 5; ++k) {
        double r = r0 + k * delta;
        r = std::clamp(r, mesh.inner(), mesh.outer());
        f[k] = evaluate(mesh, c, r);
    }
    return f;
}

}  // namespace

TraceResidualReport transmission_residuals(const ModeSystem& system, const StateVector& state) {
    if (state.coeffs.size() != system.n_state()) throw std::invalid_argument("transmission_residuals: dimension mismatch");
    if (system.annulus.n_elements() < 4 || system.disk.n_elements() < 4)
        throw std::invalid_argument("transmission_residuals: mesh too coarse for the 5-point stencil");
    const double ri = system.geometry.r_interface();
    const double ro = system.geometry.r_outer();
    const double mu = system.params.mu(), rho = system.params.rho();
    const double m2 = static_cast<double>(system.mode) * system.mode;

    const Eigen::VectorXd u = state.u(), v = state.v();
    const Eigen::VectorXd u1 = system.annulus_part(u), v1 = system.annulus_part(v), u2 = system.disk_part(u);
    const double h1 = system.annulus.element_size(0);
    const double h2 = system.disk.element_size(system.disk.n_elements() - 1);

    const auto fu1 = samples(system.annulus, u1, ri, h1);
    const OneSided du1 = one_sided(fu1, h1);
    const OneSided dv1 = one_sided(samples(system.annulus, v1, ri, h1), h1);
    const OneSided du2 = one_sided(samples(system.disk, u2, ri, -h2), -h2);

    const double f = fu1[0], f1 = du1.d1, f2 = du1.d2, f3 = du1.d3, r = ri;
    // Bending moment: Lap u + (1 - mu) B1 u = f'' + mu (f'/r - m^2 f/r^2).
    const double moment = f2 + mu * (f1 / r - m2 * f / (r * r));
    // d_r of the mode-m Laplacian f'' + f'/r - m^2 f/r^2.
    const double dlap = f3 + f2 / r - f1 / (r * r) - m2 * f1 / (r * r) + 2.0 * m2 * f / (r * r * r);
    // With nu = -e_r and tau = -e_theta: d_nu Lap u = -dlap and
    // d_tau B2 u = (m^2 / r)(f'/r - f/r^2).
    const double shear = -dlap + (1.0 - mu) * (m2 / r) * (f1 / r - f / (r * r));
    // B2 u1 - rho d_nu v1 + d_nu u2 with d_nu = -d_r.
    const double flux = shear + rho * dv1.d1 - du2.d1;

    TraceResidualReport rep;
    rep.continuity = std::abs(evaluate(system.annulus, u1, ri) - evaluate(system.disk, u2, ri));
    rep.b1 = std::abs(moment);
    rep.b2 = std::abs(flux);
    const int outer_node = system.annulus.n_elements();
    rep.clamped_value = std::abs(evaluate(system.annulus, u1, ro));
    rep.clamped_slope = std::abs(u1(2 * outer_node + 1));
    rep.h = h1;
    return rep;
}

std::vector<EigenCheck> disk_dirichlet_eigencheck(int n2, int m, int k, double r_interface, int quad_points) {
    if (k < 1) throw std::invalid_argument("disk_dirichlet_eigencheck: k must be >= 1");
    RadialMesh disk = build_radial_mesh(DomainKind::Disk, 0.0, r_interface, n2, quad_points);
    disk.keep_origin = (m == 0);
    const Eigen::MatrixXd grad = assemble_grad_form(disk, m);
    const Eigen::MatrixXd mass = assemble_mass(disk);
    const auto n = grad.rows() - 1;  // clamp the interface value
    if (k > n) throw std::invalid_argument("disk_dirichlet_eigencheck: k exceeds the number of free DOFs");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(grad.topLeftCorner(n, n),
                                                                     mass.topLeftCorner(n, n), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("disk_dirichlet_eigencheck: eigensolver failed");
    std::vector<EigenCheck> out;
    for (int j = 0; j < k; ++j) {
        const double z = bessel_zero(m, j + 1) / r_interface;
        EigenCheck c{solver.eigenvalues()(j), z * z, 0.0};
        c.relative_error = std::abs(c.computed - c.oracle) / c.oracle;
        out.push_back(c);
    }
    return out;
}

StateVector smooth_static_load(const ModeSystem& system) {
    const double ri = system.geometry.r_interface(), ro = system.geometry.r_outer();
    const int m = system.mode;
    // Annulus profiles vanish to second order at r_outer; disk profiles are
    // r^m times an even function and match the annulus value at r_interface.
    const auto annulus_profile = [=](double a) {
        return std::pair{std::function<double(double)>([=](double r) { return (ro - r) * (ro - r) * (1.0 + a * r); }),
                         std::function<double(double)>([=](double r) {
                             return -2.0 * (ro - r) * (1.0 + a * r) + a * (ro - r) * (ro - r);
                         })};
    };
    const auto disk_profile = [=](double at_interface, double b) {
        return std::function<double(double)>(
            [=](double r) { return at_interface * std::pow(r / ri, m) * (1.0 + b * (ri * ri - r * r)); });
    };
    const auto [f1, df1] = annulus_profile(0.5);
    const auto [g1, dg1] = annulus_profile(-0.25);
    const Eigen::VectorXd f = system.from_parts(interpolate(system.annulus, f1, df1),
                                                interpolate(system.disk, disk_profile(f1(ri), 0.25)));
    const Eigen::VectorXd g = system.from_parts(interpolate(system.annulus, g1, dg1),
                                                interpolate(system.disk, disk_profile(g1(ri), 0.5)));
    return make_state(system, f, g);
}

void write_json(std::ostream& out, const TraceResidualReport& report) {
    nlohmann::ordered_json j{{"continuity", report.continuity}, {"b1", report.b1},
                             {"b2", report.b2},                 {"clamped_value", report.clamped_value},
                             {"clamped_slope", report.clamped_slope}, {"h", report.h}};
    out << j.dump(2) << '\n';
}

void write_csv(std::ostream& out, const std::vector<RefinementRow>& rows) {
    out << "h,residual_b1,residual_b2,eig_err\n";
    char buf[160];
    for (const RefinementRow& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row.h, row.residual_b1, row.residual_b2,
                      row.eig_err);
        out << buf;
    }
}

}  // namespace platemem
