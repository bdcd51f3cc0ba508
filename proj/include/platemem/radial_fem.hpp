#pragma once

// Per-angular-mode radial finite elements. A field u(r, theta) = f(r) cos(m theta)
// reduces every bilinear form of the plate/membrane system to a weighted radial
// integral over r dr; the angular factor (2 pi for m = 0, pi otherwise) is
// dropped uniformly.

#include "platemem/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace platemem {

enum class DomainKind { Annulus, Disk };
enum class ElementFamily { CubicHermite, Linear };

template <typename Scalar = double>
struct RadialMeshT {
    DomainKind domain = DomainKind::Disk;
    ElementFamily element = ElementFamily::Linear;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
    int quad_points = 6;
    /// Disk only: whether the value DOF at r = 0 is part of the basis.
    bool keep_origin = true;

    int n_elements() const { return static_cast<int>(nodes.size()) - 1; }
    Scalar inner() const { return nodes(0); }
    Scalar outer() const { return nodes(nodes.size() - 1); }
    Scalar element_size(int e) const { return nodes(e + 1) - nodes(e); }

    int dof_count() const {
        const int nn = static_cast<int>(nodes.size());
        if (element == ElementFamily::CubicHermite) return 2 * nn;
        return keep_origin ? nn : nn - 1;
    }

    /// Global DOF of local basis function `k` on element `e`; -1 for the
    /// removed origin DOF.
    int dof(int e, int k) const {
        if (element == ElementFamily::CubicHermite) return 2 * e + k;
        const int node = e + k;
        if (keep_origin) return node;
        return node == 0 ? -1 : node - 1;
    }
    int local_count() const { return element == ElementFamily::CubicHermite ? 4 : 2; }
};

using RadialMesh = RadialMeshT<double>;

/// Uniform radial mesh. Annulus meshes carry C1 cubic Hermite elements (value
/// and slope per node), disk meshes piecewise-linear ones.
template <typename Scalar = double>
RadialMeshT<Scalar> build_radial_mesh(DomainKind domain, Scalar inner, Scalar outer, int n_elements,
                                      int quad_points = 6) {
    if (n_elements < 1) throw std::invalid_argument("build_radial_mesh: n_elements must be >= 1");
    if (quad_points < 1) throw std::invalid_argument("build_radial_mesh: quad_points must be >= 1");
    if (!(outer > inner)) throw std::invalid_argument("build_radial_mesh: empty interval");
    if (domain == DomainKind::Disk && inner != Scalar(0))
        throw std::invalid_argument("build_radial_mesh: disk meshes start at r = 0");
    if (domain == DomainKind::Annulus && !(inner > Scalar(0)))
        throw std::invalid_argument("build_radial_mesh: annulus mesh must not contain r = 0");
    RadialMeshT<Scalar> mesh;
    mesh.domain = domain;
    mesh.element = domain == DomainKind::Annulus ? ElementFamily::CubicHermite : ElementFamily::Linear;
    mesh.quad_points = quad_points;
    mesh.nodes.resize(n_elements + 1);
    for (int i = 0; i <= n_elements; ++i)
        mesh.nodes(i) = inner + (outer - inner) * Scalar(i) / Scalar(n_elements);
    mesh.nodes(n_elements) = outer;
    return mesh;
}

/// Values and first two radial derivatives of the local basis at xi in [0, 1].
template <typename Scalar>
struct ShapeValues {
    std::array<Scalar, 4> f{}, df{}, d2f{};
};

template <typename Scalar>
ShapeValues<Scalar> shape_values(ElementFamily family, Scalar xi, Scalar h) {
    ShapeValues<Scalar> s;
    if (family == ElementFamily::Linear) {
        s.f = {1 - xi, xi, 0, 0};
        s.df = {-1 / h, 1 / h, 0, 0};
        return s;
    }
    const Scalar x2 = xi * xi, x3 = x2 * xi;
    s.f = {1 - 3 * x2 + 2 * x3, h * (xi - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (x3 - x2)};
    s.df = {(6 * x2 - 6 * xi) / h, 1 - 4 * xi + 3 * x2, (6 * xi - 6 * x2) / h, 3 * x2 - 2 * xi};
    s.d2f = {(12 * xi - 6) / (h * h), (6 * xi - 4) / h, (6 - 12 * xi) / (h * h), (6 * xi - 2) / h};
    return s;
}

namespace detail {

// Generic element loop. `integrand(r, s, i, j)` returns the weighted integrand
// (including the r dr weight) for local basis pair (i, j). Only the upper
// triangle is integrated; the lower one is mirrored so the result is exactly
// symmetric.
template <typename Scalar, typename Integrand>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble(const RadialMeshT<Scalar>& mesh,
                                                               Integrand&& integrand) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int n = mesh.dof_count();
    Matrix A = Matrix::Zero(n, n);
    const auto rule = gauss_legendre<Scalar>(mesh.quad_points);
    const int nloc = mesh.local_count();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const Scalar h = mesh.element_size(e);
        Eigen::Matrix<Scalar, 4, 4> local = Eigen::Matrix<Scalar, 4, 4>::Zero();
        for (int q = 0; q < rule.points.size(); ++q) {
            const Scalar xi = rule.points(q);
            const Scalar r = mesh.nodes(e) + h * xi;
            const auto s = shape_values(mesh.element, xi, h);
            const Scalar w = rule.weights(q) * h * r;
            for (int i = 0; i < nloc; ++i)
                for (int j = i; j < nloc; ++j) local(i, j) += w * integrand(r, s, i, j);
        }
        for (int i = 0; i < nloc; ++i) {
            const int gi = mesh.dof(e, i);
            if (gi < 0) continue;
            for (int j = i; j < nloc; ++j) {
                const int gj = mesh.dof(e, j);
                if (gj < 0) continue;
                if (gi <= gj)
                    A(gi, gj) += local(i, j);
                else
                    A(gj, gi) += local(i, j);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) A(i, j) = A(j, i);
    return A;
}

}  // namespace detail

/// L2 form: int f g r dr.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_mass(const RadialMeshT<Scalar>& mesh) {
    return detail::assemble(mesh, [](Scalar, const ShapeValues<Scalar>& s, int i, int j) {
        return s.f[i] * s.f[j];
    });
}

/// Dirichlet form of mode m: int (f' g' + m^2 f g / r^2) r dr.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_grad_form(const RadialMeshT<Scalar>& mesh, int m) {
    if (m < 0) throw std::invalid_argument("assemble_grad_form: negative mode");
    if (mesh.domain == DomainKind::Disk && m >= 1 && mesh.keep_origin)
        throw std::invalid_argument("assemble_grad_form: mode " + std::to_string(m) +
                                    " requires the origin DOF to be removed from the disk basis");
    const Scalar m2 = Scalar(m) * Scalar(m);
    return detail::assemble(mesh, [m2](Scalar r, const ShapeValues<Scalar>& s, int i, int j) {
        return s.df[i] * s.df[j] + m2 * s.f[i] * s.f[j] / (r * r);
    });
}

/// Per-mode radial pieces of the polar Hessian of f(r) cos(m theta):
/// rr = f'', tt = f'/r - m^2 f/r^2, rt = m (f'/r - f/r^2)  (up to the angular factor).
template <typename Scalar>
struct PolarHessian {
    Scalar rr, tt, rt;
};

template <typename Scalar>
PolarHessian<Scalar> polar_hessian(Scalar r, Scalar f, Scalar df, Scalar d2f, int m) {
    const Scalar mm = Scalar(m);
    return {d2f, df / r - mm * mm * f / (r * r), mm * (df / r - f / (r * r))};
}

/// Plate form of mode m, mu <Lap f, Lap g> + (1 - mu) <Hess f, Hess g>, on an
/// annulus Hermite mesh.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_plate_form(const RadialMeshT<Scalar>& mesh, int m,
                                                                          Scalar mu) {
    if (m < 0) throw std::invalid_argument("assemble_plate_form: negative mode");
    if (mesh.element != ElementFamily::CubicHermite)
        throw std::invalid_argument("assemble_plate_form: requires a C1 cubic Hermite basis");
    if (!(mesh.inner() > Scalar(0)))
        throw std::invalid_argument("assemble_plate_form: mesh touches r = 0");
    return detail::assemble(mesh, [m, mu](Scalar r, const ShapeValues<Scalar>& s, int i, int j) {
        const auto a = polar_hessian(r, s.f[i], s.df[i], s.d2f[i], m);
        const auto b = polar_hessian(r, s.f[j], s.df[j], s.d2f[j], m);
        const Scalar lap_a = a.rr + a.tt, lap_b = b.rr + b.tt;
        return mu * lap_a * lap_b + (1 - mu) * (a.rr * b.rr + a.tt * b.tt + 2 * a.rt * b.rt);
    });
}

/// Coefficients of the interpolant of a radial profile. Hermite meshes take
/// value and slope at each node; linear meshes take nodal values (skipping a
/// removed origin DOF).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> interpolate(const RadialMeshT<Scalar>& mesh,
                                                     const std::function<Scalar(Scalar)>& f,
                                                     const std::function<Scalar(Scalar)>& df = {}) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(mesh.dof_count());
    const int nn = static_cast<int>(mesh.nodes.size());
    if (mesh.element == ElementFamily::CubicHermite) {
        if (!df) throw std::invalid_argument("interpolate: Hermite basis needs the profile derivative");
        for (int i = 0; i < nn; ++i) {
            c(2 * i) = f(mesh.nodes(i));
            c(2 * i + 1) = df(mesh.nodes(i));
        }
        return c;
    }
    for (int i = 0; i < nn; ++i) {
        const int d = mesh.keep_origin ? i : i - 1;
        if (d >= 0) c(d) = f(mesh.nodes(i));
    }
    return c;
}

/// Point evaluation of the discrete function with coefficients `c` (value only).
template <typename Scalar, typename Derived>
Scalar evaluate(const RadialMeshT<Scalar>& mesh, const Eigen::MatrixBase<Derived>& c, Scalar r) {
    const int ne = mesh.n_elements();
    if (r < mesh.inner() || r > mesh.outer()) throw std::out_of_range("evaluate: radius outside mesh");
    int e = 0;
    {
        int lo = 0, hi = ne - 1;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (mesh.nodes(mid) <= r)
                lo = mid;
            else
                hi = mid - 1;
        }
        e = lo;
    }
    const Scalar h = mesh.element_size(e);
    const auto s = shape_values(mesh.element, (r - mesh.nodes(e)) / h, h);
    Scalar value = 0;
    for (int k = 0; k < mesh.local_count(); ++k) {
        const int g = mesh.dof(e, k);
        if (g >= 0) value += c(g) * s.f[k];
    }
    return value;
}

}  // namespace platemem
