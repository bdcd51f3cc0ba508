#include "platemem/spectral.hpp"

#include "platemem/dynamics.hpp"
#include "platemem/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace platemem {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

double certification_tolerance(const Eigen::MatrixXd& A) {
    return 1e-10 * std::max(1.0, A.cwiseAbs().colwise().sum().maxCoeff());
}

}  // namespace

StaticSolution static_solve(const ModeSystem& system, const StateVector& F) {
    if (F.coeffs.size() != system.n_state()) throw std::invalid_argument("static_solve: dimension mismatch");
    const auto n = system.n_u();
    const Eigen::VectorXd f = F.coeffs.head(n), g = F.coeffs.tail(n);

    // -B U = M F splits into K v = -K f and K u + D v = Mv g, so v = -f exactly
    // and only the SPD system K u = Mv g + D f needs solving.
    const MatrixXld K = system.K.cast<long double>();
    const VectorXld rhs = system.Mv.cast<long double>() * g.cast<long double>() +
                          system.D.cast<long double>() * f.cast<long double>();
    Eigen::LLT<Eigen::MatrixXd> llt(system.K);
    if (llt.info() != Eigen::Success) throw NumericalError("static_solve: stiffness is not positive definite");

    Eigen::VectorXd u = llt.solve(rhs.cast<double>());
    VectorXld r = rhs - K * u.cast<long double>();
    for (int sweep = 0; sweep < 6; ++sweep) {
        const Eigen::VectorXd du = llt.solve(r.cast<double>());
        const VectorXld u_next = u.cast<long double>() + du.cast<long double>();
        const VectorXld r_next = rhs - K * u_next.cast<double>().cast<long double>();
        if (!(r_next.norm() < r.norm())) break;
        u = u_next.cast<double>();
        r = r_next;
    }

    StaticSolution out;
    out.U = make_state(system, u, -f);
    const VectorXld MF = system.pencil.M.cast<long double>() * F.coeffs.cast<long double>();
    const VectorXld res = MF + system.pencil.B.cast<long double>() * out.U.coeffs.cast<long double>();
    const auto rhs_norm = static_cast<double>(MF.norm());
    out.residual = rhs_norm > 0.0 ? static_cast<double>(res.norm()) / rhs_norm : static_cast<double>(res.norm());
    return out;
}

void summarize(SpectrumReport& report, double tol) {
    report.max_real_part = -std::numeric_limits<double>::infinity();
    report.min_abs_real_part = std::numeric_limits<double>::infinity();
    report.imaginary_axis_hit = false;
    for (const EigenPair& p : report.pairs) {
        report.max_real_part = std::max(report.max_real_part, p.value.real());
        report.min_abs_real_part = std::min(report.min_abs_real_part, std::abs(p.value.real()));
        if (std::abs(p.value.real()) <= tol) report.imaginary_axis_hit = true;
    }
}

SpectrumReport spectrum(const WhitenedPencil& pencil, int mode) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(pencil.A, true);
    if (solver.info() != Eigen::Success) throw NumericalError("spectrum: QR algorithm did not converge");
    const Eigen::VectorXcd values = solver.eigenvalues();
    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    const Eigen::MatrixXcd Ac = pencil.A.cast<Complex>();
    const Eigen::MatrixXcd U =
        pencil.L.transpose().cast<Complex>().triangularView<Eigen::Upper>().solve(vectors);
    const double tol = certification_tolerance(pencil.A);
    SpectrumReport report;
    report.pairs.reserve(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Eigen::VectorXcd y = vectors.col(i);
        EigenPair p;
        p.value = values(i);
        p.mode = mode;
        p.residual = (Ac * y - values(i) * y).norm() / y.norm();
        p.vector = U.col(i);
        if (!(p.residual <= tol)) ++report.nonconverged;
        report.pairs.push_back(std::move(p));
    }
    summarize(report);
    return report;
}

SpectrumReport spectrum(const ModeSystem& system) { return spectrum(system.whitened, system.mode); }

SpectrumReport eigenvalues_near(const WhitenedPencil& pencil, Complex shift, int k, int mode) {
    const auto n = pencil.size();
    if (k < 1) throw std::invalid_argument("eigenvalues_near: k must be >= 1");
    k = static_cast<int>(std::min<Eigen::Index>(k, n));
    const Eigen::MatrixXcd Ac = pencil.A.cast<Complex>();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    Complex sigma = shift;
    constexpr int max_retries = 8;
    int attempt = 0;
    for (;; ++attempt) {
        lu.compute(Ac - sigma * I);
        if (std::isfinite(lu.rcond()) && lu.rcond() > 1e-13) break;
        if (attempt == max_retries) throw NumericalError("eigenvalues_near: shift stays singular after perturbation");
        sigma += Complex(1e-7, 1e-7) * (1.0 + std::abs(sigma)) * std::ldexp(1.0, attempt);
    }
    const Eigen::MatrixXcd inv = lu.inverse();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(inv, true);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues_near: eigen iteration did not converge");
    const Eigen::VectorXcd theta = solver.eigenvalues();

    std::vector<Eigen::Index> order(theta.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });

    const double tol = certification_tolerance(pencil.A);
    const Eigen::MatrixXcd Lt = pencil.L.transpose().cast<Complex>();
    SpectrumReport report;
    for (int j = 0; j < k; ++j) {
        const Eigen::Index idx = order[j];
        const Eigen::VectorXcd y = solver.eigenvectors().col(idx);
        EigenPair p;
        p.value = sigma + 1.0 / theta(idx);
        p.mode = mode;
        p.residual = (Ac * y - p.value * y).norm() / y.norm();
        p.vector = Lt.triangularView<Eigen::Upper>().solve(y);
        if (!(p.residual <= tol)) ++report.nonconverged;
        report.pairs.push_back(std::move(p));
    }
    summarize(report);
    return report;
}

SpectrumReport eigenvalues_near(const ModeSystem& system, Complex shift, int k) {
    return eigenvalues_near(system.whitened, shift, k, system.mode);
}

double resolvent_norm(const WhitenedPencil& pencil, double lambda) {
    const auto n = pencil.size();
    const Eigen::MatrixXcd R = Complex(0.0, lambda) * Eigen::MatrixXcd::Identity(n, n) - pencil.A.cast<Complex>();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(R);
    const double smin = svd.singularValues()(n - 1);
    const double norm = 1.0 / smin;
    return std::isfinite(norm) && norm <= kResolventSentinel ? norm : std::numeric_limits<double>::infinity();
}

double resolvent_norm(const ModeSystem& system, double lambda) { return resolvent_norm(system.whitened, lambda); }

ResolventEvaluator::ResolventEvaluator(const WhitenedPencil& pencil) {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(pencil.A.cast<Complex>(), false);
    if (schur.info() != Eigen::Success) throw NumericalError("ResolventEvaluator: Schur decomposition failed");
    T_ = schur.matrixT();
    eigenvalues_ = T_.diagonal();
    warm_ = Eigen::VectorXcd::Ones(T_.rows()).normalized();
}

double ResolventEvaluator::operator()(double lambda) {
    const auto n = T_.rows();
    Eigen::MatrixXcd R = -T_;
    R.diagonal().array() += Complex(0.0, lambda);
    const double dmin = R.diagonal().cwiseAbs().minCoeff();
    if (!(dmin > 0.0)) return std::numeric_limits<double>::infinity();

    // Power iteration on (R^* R)^{-1}; |R^{-1} x| increases monotonically to |R^{-1}|.
    const auto upper = R.triangularView<Eigen::Upper>();
    Eigen::VectorXcd x = warm_;
    double s_prev = 0.0, s = 0.0;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXcd y = upper.solve(x);
        s = y.norm();
        if (!std::isfinite(s) || s > kResolventSentinel) return std::numeric_limits<double>::infinity();
        Eigen::VectorXcd z = upper.adjoint().solve(y);
        x = z / z.norm();
        if (it > 2 && s - s_prev <= 1e-12 * s) {
            converged = true;
            break;
        }
        s_prev = s;
    }
    if (converged) {
        warm_ = x;
        return s;
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(R, Eigen::ComputeThinV);
    const double smin = svd.singularValues()(n - 1);
    warm_ = svd.matrixV().col(n - 1);
    const double norm = 1.0 / smin;
    return std::isfinite(norm) && norm <= kResolventSentinel ? norm : std::numeric_limits<double>::infinity();
}

std::vector<ResolventSample> sweep_resolvent(const std::vector<ModeSystem>& systems,
                                             const std::vector<double>& lambda_grid, int threads) {
    if (lambda_grid.empty()) throw std::invalid_argument("sweep_resolvent: empty frequency grid");
    if (systems.empty()) throw std::invalid_argument("sweep_resolvent: no modes");
    std::vector<std::vector<double>> norms(systems.size());
    parallel_for(static_cast<int>(systems.size()), threads, [&](int k) {
        ResolventEvaluator eval(systems[k].whitened);
        norms[k].reserve(lambda_grid.size());
        for (double lambda : lambda_grid) norms[k].push_back(eval(lambda));
    });
    std::vector<ResolventSample> samples;
    samples.reserve(lambda_grid.size());
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        ResolventSample s{lambda_grid[i], -1.0, systems.front().mode, false};
        for (std::size_t k = 0; k < systems.size(); ++k) {
            if (norms[k][i] > s.norm) {
                s.norm = norms[k][i];
                s.mode_argmax = systems[k].mode;
            }
        }
        s.flagged = !std::isfinite(s.norm);
        samples.push_back(s);
    }
    return samples;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) throw std::invalid_argument("log_grid: need 0 < lo <= hi");
    if (hi == lo) return {lo};
    const int intervals = std::max(1, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)));
    std::vector<double> grid(intervals + 1);
    for (int k = 0; k <= intervals; ++k) grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / intervals);
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::vector<double> resonance_grid(const std::vector<ModeSystem>& systems, double lo, double hi, int per_decade) {
    std::vector<double> grid = log_grid(lo, hi, per_decade);
    for (const ModeSystem& sys : systems) {
        const SpectrumReport rep = spectrum(sys);
        for (const EigenPair& p : rep.pairs) {
            const double w = p.value.imag();
            if (w >= lo && w <= hi) grid.push_back(w);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return b - a <= 1e-12 * b; }),
               grid.end());
    return grid;
}

GrowthFit estimate_growth_exponent(const std::vector<ResolventSample>& samples) {
    if (samples.size() < 5) throw NumericalError("growth exponent fit needs at least 5 samples");
    std::vector<double> x, y;
    for (const ResolventSample& s : samples) {
        if (s.flagged || !std::isfinite(s.norm) || !(s.norm > 0.0) || !(s.lambda > 0.0))
            throw NumericalError("growth exponent fit: samples must be finite, positive and at positive frequency");
        x.push_back(std::log(s.lambda));
        y.push_back(std::log(s.norm));
    }
    const LinearFit line = least_squares_line(x, y);
    return {line.slope, line.r_squared, samples.size()};
}

std::vector<ResolventSample> running_maximum(const std::vector<ResolventSample>& samples) {
    std::vector<ResolventSample> out;
    for (const ResolventSample& s : samples) {
        if (s.flagged || !std::isfinite(s.norm)) continue;
        out.push_back(s);
        if (out.size() > 1 && out[out.size() - 2].norm > s.norm) {
            out.back().norm = out[out.size() - 2].norm;
            out.back().mode_argmax = out[out.size() - 2].mode_argmax;
        }
    }
    return out;
}

std::vector<ResolventSample> octave_maxima(const std::vector<ResolventSample>& samples) {
    std::vector<ResolventSample> out;
    if (samples.empty()) return out;
    const double lo = samples.front().lambda;
    int current = -1;
    for (const ResolventSample& s : samples) {
        const int octave = static_cast<int>(std::floor(std::log2(s.lambda / lo) + 1e-12));
        if (octave != current) {
            out.push_back(s);
            current = octave;
        } else if (s.norm > out.back().norm) {
            out.back() = s;
        }
    }
    return out;
}

AxisCheck check_imaginary_axis_clear(const std::vector<ModeSystem>& systems, const std::vector<double>& lambda_grid,
                                     double tol, int threads) {
    std::vector<double> mins(systems.size(), std::numeric_limits<double>::infinity());
    parallel_for(static_cast<int>(systems.size()), threads,
                 [&](int k) { mins[k] = spectrum(systems[k]).min_abs_real_part; });
    AxisCheck check;
    check.min_distance = *std::min_element(mins.begin(), mins.end());
    check.clear = check.min_distance > tol;
    if (check.clear && !lambda_grid.empty()) {
        for (const ResolventSample& s : sweep_resolvent(systems, lambda_grid, threads))
            if (s.flagged) check.clear = false;
    }
    return check;
}

void write_csv(std::ostream& out, const std::vector<ResolventSample>& samples) {
    out << "lambda,norm,mode_argmax\n";
    char buf[128];
    for (const ResolventSample& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", s.lambda, s.norm, s.mode_argmax);
        out << buf;
    }
}

void write_json(std::ostream& out, const SpectrumReport& report) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const EigenPair& p : report.pairs)
        arr.push_back({{"re", p.value.real()}, {"im", p.value.imag()}, {"residual", p.residual}, {"mode", p.mode}});
    out << arr.dump(2) << '\n';
}

}  // namespace platemem
