#include "platemem/mode_system.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <string>

namespace platemem {

namespace {

void scatter(Eigen::MatrixXd& target, const Eigen::MatrixXd& local, const std::vector<int>& map, double scale = 1.0) {
    const int n = static_cast<int>(map.size());
    for (int i = 0; i < n; ++i) {
        if (map[i] < 0) continue;
        for (int j = 0; j < n; ++j) {
            if (map[j] < 0) continue;
            target(map[i], map[j]) += scale * local(i, j);
        }
    }
}

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& A, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string("assemble_mode_system: ") + what + " is not positive definite");
    return llt.matrixL();
}

}  // namespace

ModeSystem assemble_mode_system(const PhysicalParams& params, const AnnulusGeometry& geom, const Discretization& disc,
                                int mode) {
    if (mode < 0) throw std::invalid_argument("assemble_mode_system: negative mode");
    if (disc.n1 < 1 || disc.n2 < 1) throw std::invalid_argument("assemble_mode_system: element counts must be >= 1");

    ModeSystem sys{.mode = mode, .params = params, .geometry = geom};
    sys.annulus = build_radial_mesh(DomainKind::Annulus, geom.r_interface(), geom.r_outer(), disc.n1, disc.quad_points);
    sys.disk = build_radial_mesh(DomainKind::Disk, 0.0, geom.r_interface(), disc.n2, disc.quad_points);
    // f(0) = 0 is needed for a finite m^2 f^2 / r term.
    sys.disk.keep_origin = (mode == 0);

    sys.mass1 = assemble_mass(sys.annulus);
    sys.plate = assemble_plate_form(sys.annulus, mode, params.mu());
    sys.grad1 = assemble_grad_form(sys.annulus, mode);
    sys.mass2 = assemble_mass(sys.disk);
    sys.grad2 = assemble_grad_form(sys.disk, mode);

    const int n1_full = sys.annulus.dof_count();
    const int n2_full = sys.disk.dof_count();
    const int annulus_free = n1_full - 2;  // clamped value and slope at r_outer
    const int n_u = annulus_free + n2_full - 1;

    sys.annulus_map.assign(n1_full, -1);
    for (int i = 0; i < annulus_free; ++i) sys.annulus_map[i] = i;
    sys.disk_map.assign(n2_full, -1);
    for (int i = 0; i < n2_full - 1; ++i) sys.disk_map[i] = annulus_free + i;
    sys.disk_map[n2_full - 1] = 0;  // interface node, owned by the annulus

    sys.K = Eigen::MatrixXd::Zero(n_u, n_u);
    sys.Mv = Eigen::MatrixXd::Zero(n_u, n_u);
    sys.D = Eigen::MatrixXd::Zero(n_u, n_u);
    scatter(sys.K, sys.plate, sys.annulus_map);
    scatter(sys.K, sys.grad2, sys.disk_map);
    scatter(sys.Mv, sys.mass1, sys.annulus_map);
    scatter(sys.Mv, sys.mass2, sys.disk_map);
    if (params.rho() > 0.0) scatter(sys.D, sys.grad1, sys.annulus_map, params.rho());
    if (params.beta() > 0.0) scatter(sys.D, sys.mass2, sys.disk_map, params.beta());

    const int n = 2 * n_u;
    sys.pencil.M = Eigen::MatrixXd::Zero(n, n);
    sys.pencil.M.topLeftCorner(n_u, n_u) = sys.K;
    sys.pencil.M.bottomRightCorner(n_u, n_u) = sys.Mv;
    sys.pencil.B = Eigen::MatrixXd::Zero(n, n);
    sys.pencil.B.topRightCorner(n_u, n_u) = sys.K;
    sys.pencil.B.bottomLeftCorner(n_u, n_u) = -sys.K;
    sys.pencil.B.bottomRightCorner(n_u, n_u) = -sys.D;

    // Block whitening: with K = Lk Lk^T, Mv = Lv Lv^T and C = Lv^{-1} Lk the
    // generator is [[0, C^T], [-C, -Lv^{-1} D Lv^{-T}]], skew up to the damping.
    const Eigen::MatrixXd Lk = lower_cholesky(sys.K, "stiffness K");
    const Eigen::MatrixXd Lv = lower_cholesky(sys.Mv, "mass Mv");
    const auto Lv_lower = Lv.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd C = Lv_lower.solve(Lk);
    Eigen::MatrixXd Dw = Lv_lower.solve(Lv_lower.solve(sys.D).transpose());
    Dw = 0.5 * (Dw + Dw.transpose()).eval();

    sys.whitened.L = Eigen::MatrixXd::Zero(n, n);
    sys.whitened.L.topLeftCorner(n_u, n_u) = Lk;
    sys.whitened.L.bottomRightCorner(n_u, n_u) = Lv;
    sys.whitened.A = Eigen::MatrixXd::Zero(n, n);
    sys.whitened.A.topRightCorner(n_u, n_u) = C.transpose();
    sys.whitened.A.bottomLeftCorner(n_u, n_u) = -C;
    sys.whitened.A.bottomRightCorner(n_u, n_u) = -Dw;
    return sys;
}

Eigen::VectorXd ModeSystem::annulus_part(const Eigen::VectorXd& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(annulus_map.size()));
    for (std::size_t i = 0; i < annulus_map.size(); ++i)
        if (annulus_map[i] >= 0) out(i) = w(annulus_map[i]);
    return out;
}

Eigen::VectorXd ModeSystem::disk_part(const Eigen::VectorXd& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disk_map.size()));
    for (std::size_t i = 0; i < disk_map.size(); ++i)
        if (disk_map[i] >= 0) out(i) = w(disk_map[i]);
    return out;
}

Eigen::VectorXd ModeSystem::from_parts(const Eigen::VectorXd& annulus_coeffs, const Eigen::VectorXd& disk_coeffs) const {
    if (annulus_coeffs.size() != static_cast<Eigen::Index>(annulus_map.size()) ||
        disk_coeffs.size() != static_cast<Eigen::Index>(disk_map.size()))
        throw std::invalid_argument("ModeSystem::from_parts: coefficient sizes do not match the meshes");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_u());
    for (std::size_t i = 0; i + 1 < disk_map.size(); ++i) w(disk_map[i]) = disk_coeffs(i);
    for (std::size_t i = 0; i < annulus_map.size(); ++i)
        if (annulus_map[i] >= 0) w(annulus_map[i]) = annulus_coeffs(i);
    return w;
}

StateVector zero_state(const ModeSystem& system) {
    return {system.mode, Eigen::VectorXd::Zero(system.n_state())};
}

StateVector make_state(const ModeSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != system.n_u() || v.size() != system.n_u())
        throw std::invalid_argument("make_state: block sizes do not match the mode system");
    StateVector s{system.mode, Eigen::VectorXd(system.n_state())};
    s.coeffs << u, v;
    return s;
}

}  // namespace platemem
