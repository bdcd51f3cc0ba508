#include "platemem/pencil.hpp"

#include "platemem/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace platemem {

Eigen::VectorXd WhitenedPencil::to_energy(const Eigen::VectorXd& U) const {
    return L.transpose().triangularView<Eigen::Upper>() * U;
}

Eigen::VectorXd WhitenedPencil::from_energy(const Eigen::VectorXd& x) const {
    return L.transpose().triangularView<Eigen::Upper>().solve(x);
}

WhitenedPencil whiten(const Pencil& pencil) {
    if (pencil.M.rows() != pencil.M.cols() || pencil.B.rows() != pencil.M.rows() ||
        pencil.B.cols() != pencil.M.cols())
        throw NumericalError("whiten: pencil dimensions mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(pencil.M);
    if (llt.info() != Eigen::Success) throw NumericalError("whiten: mass matrix is not positive definite");
    WhitenedPencil w;
    w.L = llt.matrixL();
    const auto lower = w.L.triangularView<Eigen::Lower>();
    auto congruence = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        Eigen::MatrixXd Y = lower.solve(X);
        return lower.solve(Y.transpose()).transpose();
    };
    const Eigen::MatrixXd skew = congruence(0.5 * (pencil.B - pencil.B.transpose()));
    const Eigen::MatrixXd sym = congruence(0.5 * (pencil.B + pencil.B.transpose()));
    w.A = 0.5 * (skew - skew.transpose()) + 0.5 * (sym + sym.transpose());
    return w;
}

}  // namespace platemem
