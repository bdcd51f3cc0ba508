#pragma once

#include "platemem/model.hpp"
#include "platemem/pencil.hpp"
#include "platemem/radial_fem.hpp"

#include <Eigen/Core>

#include <vector>

namespace platemem {

struct Discretization {
    int n1 = 32;  // annulus elements
    int n2 = 32;  // disk elements
    int quad_points = 6;
};

/// Assembled system of one angular mode on the trace-coupled space.
///
/// Constrained DOF layout (size n_u):
///   [0, 2 n1)          annulus Hermite DOFs of nodes 0..n1-1 (value, slope);
///                      index 0 is the interface value, shared with the disk
///   [2 n1, n_u)        disk nodal values except the interface node (and the
///                      origin when m >= 1)
/// The outer annulus node is clamped and eliminated. The state vector is
/// (u, v) with both blocks on this layout.
struct ModeSystem {
    int mode = 0;
    PhysicalParams params;
    AnnulusGeometry geometry;
    RadialMesh annulus{}, disk{};

    // Unconstrained per-domain forms.
    Eigen::MatrixXd mass1{}, plate{}, grad1{};
    Eigen::MatrixXd mass2{}, grad2{};

    // full annulus / disk DOF -> constrained DOF, -1 when eliminated
    std::vector<int> annulus_map{}, disk_map{};

    Eigen::MatrixXd K{}; // plate (+) grad2
    Eigen::MatrixXd Mv{}; // mass1 (+) mass2
    Eigen::MatrixXd D{}; // rho grad1 (+) beta mass2

    Pencil pencil{};         // M = diag(K, Mv), B = [[0, K], [-K, -D]]
    WhitenedPencil whitened{}; // energy coordinates

    int n_u() const { return static_cast<int>(K.rows()); }
    int n_state() const { return 2 * n_u(); }

    /// Restrict a constrained-space vector to the full annulus / disk coefficients.
    Eigen::VectorXd annulus_part(const Eigen::VectorXd& w) const;
    Eigen::VectorXd disk_part(const Eigen::VectorXd& w) const;
    /// Assemble a constrained-space vector from per-domain coefficients. The
    /// shared interface DOF is taken from the annulus; eliminated DOFs are dropped.
    Eigen::VectorXd from_parts(const Eigen::VectorXd& annulus_coeffs, const Eigen::VectorXd& disk_coeffs) const;
};

struct StateVector {
    int mode = 0;
    Eigen::VectorXd coeffs;  // (u, v)

    auto u() const { return coeffs.head(coeffs.size() / 2); }
    auto v() const { return coeffs.tail(coeffs.size() / 2); }
};

ModeSystem assemble_mode_system(const PhysicalParams& params, const AnnulusGeometry& geom, const Discretization& disc,
                                int mode);

StateVector zero_state(const ModeSystem& system);
StateVector make_state(const ModeSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

}  // namespace platemem
