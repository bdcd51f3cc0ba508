#pragma once

#include <Eigen/Core>

namespace platemem {

/// First-order semi-discrete system M U' = B U with M symmetric positive definite.
struct Pencil {
    Eigen::MatrixXd M;
    Eigen::MatrixXd B;
};

/// The pencil in energy coordinates x = L^T U, M = L L^T. There the energy
/// norm is Euclidean and the generator is A = L^{-1} B L^{-T}.
struct WhitenedPencil {
    Eigen::MatrixXd L;  // lower triangular
    Eigen::MatrixXd A;

    Eigen::Index size() const { return A.rows(); }
    Eigen::VectorXd to_energy(const Eigen::VectorXd& U) const;
    Eigen::VectorXd from_energy(const Eigen::VectorXd& x) const;
    /// Symmetric part of A; equals minus the whitened damping.
    Eigen::MatrixXd symmetric_part() const { return 0.5 * (A + A.transpose()); }
};

/// Generic whitening via a Cholesky factor of M. The skew and symmetric parts
/// of A are formed separately so a skew B yields an exactly skew A.
WhitenedPencil whiten(const Pencil& pencil);

}  // namespace platemem
