#include "platemem/diagnostics.hpp"
#include "platemem/spectral.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace platemem;

namespace {

ModeSystem make_system(double rho, double beta, int m, int n = 8) {
    return assemble_mode_system(validate_params({rho, beta, 0.3}), AnnulusGeometry(1.0, 2.0), {n, n, 6}, m);
}

WhitenedPencil scalar_pencil(double a) {
    Pencil p{Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Constant(1, 1, a)};
    return whiten(p);
}

std::vector<ResolventSample> power_samples(double alpha, double c = 3.0) {
    std::vector<ResolventSample> out;
    for (double lambda : log_grid(1.0, 100.0, 10)) out.push_back({lambda, c * std::pow(lambda, alpha), 0, false});
    return out;
}

double max_norm(const std::vector<ResolventSample>& samples) {
    double best = 0.0;
    for (const auto& s : samples) best = std::max(best, s.norm);
    return best;
}

}  // namespace

TEST(StaticSolve, ZeroLoadGivesZero) {
    const ModeSystem s = make_system(1.0, 1.0, 0);
    const StaticSolution sol = static_solve(s, zero_state(s));
    EXPECT_EQ(sol.U.coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(StaticSolve, RoundTripRecoversState) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (double rho : {0.0, 1.0})
        for (double beta : {0.0, 1.0})
            for (int m : {0, 1, 2}) {
                const ModeSystem s = make_system(rho, beta, m);
                Eigen::VectorXd U0(s.n_state());
                for (Eigen::Index i = 0; i < U0.size(); ++i) U0(i) = g(rng);
                const Eigen::VectorXd F = -s.pencil.M.ldlt().solve(s.pencil.B * U0);
                const StaticSolution sol = static_solve(s, StateVector{m, F});
                EXPECT_LE((sol.U.coeffs - U0).norm(), 1e-9 * U0.norm());
                EXPECT_LE(sol.residual, 1e-10);
            }
}

TEST(StaticSolve, SmoothLoadResidual) {
    for (int m : {0, 1, 3}) {
        const ModeSystem s = make_system(1.0, 0.0, m, 32);
        EXPECT_LE(static_solve(s, smooth_static_load(s)).residual, 1e-10) << m;
    }
}

TEST(Spectrum, ScalarOscillatorPencil) {
    const double k0 = 3.0, m0 = 0.75;
    Pencil p{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    p.M.diagonal() << k0, m0;
    p.B << 0, k0, -k0, 0;
    const SpectrumReport rep = eigenvalues_near(whiten(p), Complex(0.0, 0.0), 2);
    ASSERT_EQ(rep.pairs.size(), 2u);
    std::vector<double> im;
    for (const auto& pair : rep.pairs) {
        EXPECT_NEAR(pair.value.real(), 0.0, 1e-14);
        im.push_back(pair.value.imag());
    }
    std::sort(im.begin(), im.end());
    EXPECT_NEAR(im[0], -2.0, 1e-13);
    EXPECT_NEAR(im[1], 2.0, 1e-13);
}

TEST(Spectrum, DiskDirichletWaveBlock) {
    auto disk = build_radial_mesh(DomainKind::Disk, 0.0, 1.0, 64);
    const Eigen::MatrixXd G = assemble_grad_form(disk, 0), Mm = assemble_mass(disk);
    const int n = static_cast<int>(G.rows()) - 1;  // interface node clamped
    Pencil p{Eigen::MatrixXd::Zero(2 * n, 2 * n), Eigen::MatrixXd::Zero(2 * n, 2 * n)};
    p.M.topLeftCorner(n, n) = G.topLeftCorner(n, n);
    p.M.bottomRightCorner(n, n) = Mm.topLeftCorner(n, n);
    p.B.topRightCorner(n, n) = G.topLeftCorner(n, n);
    p.B.bottomLeftCorner(n, n) = -G.topLeftCorner(n, n);
    const SpectrumReport rep = eigenvalues_near(whiten(p), Complex(0.0, 2.0), 1);
    ASSERT_EQ(rep.pairs.size(), 1u);
    const double omega2 = rep.pairs[0].value.imag() * rep.pairs[0].value.imag();
    EXPECT_NEAR(omega2, 5.783185962947, 1e-3 * 5.783185962947);
    EXPECT_EQ(rep.nonconverged, 0);
}

TEST(Spectrum, DampedRegimesInOpenLeftHalfPlane) {
    for (int m : {0, 1, 2}) {
        const SpectrumReport rep = spectrum(make_system(1.0, 1.0, m));
        EXPECT_LT(rep.max_real_part, -1e-10);
        EXPECT_EQ(rep.nonconverged, 0);
        const SpectrumReport near = eigenvalues_near(make_system(1.0, 1.0, m), Complex(0.0, 5.0), 6);
        for (const auto& p : near.pairs) EXPECT_LT(p.value.real(), -1e-10);
    }
}

TEST(Spectrum, ConjugateSymmetric) {
    for (double beta : {0.0, 1.0}) {
        const SpectrumReport rep = spectrum(make_system(1.0, beta, 1));
        for (const auto& p : rep.pairs) {
            double best = 1e300;
            for (const auto& q : rep.pairs) best = std::min(best, std::abs(q.value - std::conj(p.value)));
            EXPECT_LE(best, 1e-9 * (1.0 + std::abs(p.value)));
        }
    }
}

TEST(Spectrum, ConservativeSpectrumOnImaginaryAxis) {
    const SpectrumReport rep = spectrum(make_system(0.0, 0.0, 0));
    EXPECT_TRUE(rep.imaginary_axis_hit);
    for (const auto& p : rep.pairs) EXPECT_LE(std::abs(p.value.real()), 1e-9);
}

TEST(Spectrum, EigenvectorsAreInStateCoordinates) {
    const ModeSystem s = make_system(1.0, 0.0, 1);
    const Eigen::MatrixXcd M = s.pencil.M.cast<Complex>(), B = s.pencil.B.cast<Complex>();
    for (const auto& p : spectrum(s).pairs) {
        const Eigen::VectorXcd& x = p.vector;
        EXPECT_LE((B * x - p.value * (M * x)).norm(), 1e-8 * (1.0 + std::abs(p.value)) * (M * x).norm());
    }
}

TEST(Resolvent, ScalarPencil) {
    const WhitenedPencil p = scalar_pencil(-1.0);
    EXPECT_NEAR(resolvent_norm(p, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(resolvent_norm(p, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
    ResolventEvaluator eval(p);
    EXPECT_NEAR(eval(1.0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Resolvent, SymmetricInFrequency) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> lam(0.1, 60.0);
    const ModeSystem s = make_system(1.0, 0.0, 2);
    ResolventEvaluator eval(s.whitened);
    for (int k = 0; k < 20; ++k) {
        const double l = lam(rng);
        const double a = resolvent_norm(s, l), b = resolvent_norm(s, -l);
        EXPECT_NEAR(a, b, 1e-8 * a);
        EXPECT_NEAR(eval(l), a, 1e-8 * a);
    }
}

TEST(Resolvent, ZeroFrequencyMatchesInverseOperatorNorm) {
    const ModeSystem s = make_system(1.0, 1.0, 0);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.whitened.A, Eigen::ComputeFullU);
    const double expected = 1.0 / svd.singularValues().minCoeff();
    const auto samples = sweep_resolvent({s}, {0.0});
    ASSERT_EQ(samples.size(), 1u);
    EXPECT_NEAR(samples[0].norm, expected, 1e-9 * expected);

    // The static solve attains, and never exceeds, the same gain.
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd F(s.n_state());
        for (Eigen::Index i = 0; i < F.size(); ++i) F(i) = g(rng);
        const StaticSolution sol = static_solve(s, StateVector{0, F});
        const double gain = std::sqrt(sol.U.coeffs.dot(s.pencil.M * sol.U.coeffs) / F.dot(s.pencil.M * F));
        EXPECT_LE(gain, expected * (1 + 1e-9));
    }
    // A^{-1} attains its norm on the left singular vector of sigma_min
    const Eigen::VectorXd x = svd.matrixU().col(svd.cols() - 1);
    const Eigen::VectorXd F = s.whitened.from_energy(x);
    const StaticSolution sol = static_solve(s, StateVector{0, F});
    const double gain = std::sqrt(sol.U.coeffs.dot(s.pencil.M * sol.U.coeffs) / F.dot(s.pencil.M * F));
    EXPECT_NEAR(gain, expected, 1e-8 * expected);
}

TEST(Resolvent, EigenvalueReportedAsInfinite) {
    EXPECT_TRUE(std::isinf(resolvent_norm(scalar_pencil(0.0), 0.0)));
    Pencil p{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd(2, 2)};
    p.B << 0, 2, -2, 0;
    const WhitenedPencil w = whiten(p);
    EXPECT_TRUE(std::isinf(resolvent_norm(w, 2.0)));
    ResolventEvaluator eval(w);
    EXPECT_TRUE(std::isinf(eval(-2.0)));
    EXPECT_NEAR(eval(1.0), 1.0, 1e-14);
}

TEST(Resolvent, DampedDampedUniformlyBounded) {
    std::vector<ModeSystem> systems;
    // n = 64 keeps the whole grid below the highest discrete membrane frequency;
    // past it the discrete resolvent decays like 1 / lambda.
    for (int m : {0, 1, 2}) systems.push_back(make_system(1.0, 1.0, m, 64));
    const auto samples = sweep_resolvent(systems, log_grid(1.0, 100.0, 64), 3);
    double lo = 1e300, hi = 0.0;
    for (const auto& s : samples) {
        lo = std::min(lo, s.norm);
        hi = std::max(hi, s.norm);
    }
    EXPECT_LT(hi / lo, 10.0);
}

TEST(Resolvent, DampedUndampedGrowsWithRangeAndModes) {
    std::vector<ModeSystem> few, many;
    for (int m = 0; m <= 4; ++m) {
        many.push_back(make_system(1.0, 0.0, m, 16));
        if (m == 0) few.push_back(many.back());
    }
    const auto narrow = sweep_resolvent(many, resonance_grid(many, 1.0, 10.0, 64), 2);
    const auto wide = sweep_resolvent(many, resonance_grid(many, 1.0, 100.0, 64), 2);
    const auto single = sweep_resolvent(few, resonance_grid(many, 1.0, 100.0, 64), 1);
    EXPECT_GT(max_norm(wide), max_norm(narrow));
    EXPECT_GT(max_norm(wide), max_norm(single));
}

TEST(Resolvent, MonotoneApproachToLightlyDampedEigenvalue) {
    const ModeSystem s = make_system(1.0, 0.0, 1);
    // eigenvalue with positive imaginary part closest to the axis
    EigenPair target;
    double best = 1e300;
    for (const auto& p : spectrum(s).pairs)
        if (p.value.imag() > 1.0 && std::abs(p.value.real()) < best) {
            best = std::abs(p.value.real());
            target = p;
        }
    ASSERT_LT(best, 1e300);
    double prev = 0.0;
    for (int k = 0; k < 12; ++k) {
        const double delta = 0.5 * std::ldexp(1.0, -k);
        const double norm = resolvent_norm(s, target.value.imag() - delta);
        EXPECT_GT(norm, prev) << k;
        prev = norm;
    }
}

TEST(GrowthFit, ExactPowerLaws) {
    const GrowthFit two = estimate_growth_exponent(power_samples(2.0));
    EXPECT_NEAR(two.alpha, 2.0, 1e-12);
    EXPECT_NEAR(two.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(estimate_growth_exponent(power_samples(0.0)).alpha, 0.0, 1e-14);
    EXPECT_EQ(GrowthFit::certified_ceiling, 30.0);
}

TEST(GrowthFit, RejectsDegenerateInput) {
    auto samples = power_samples(1.0);
    samples.resize(4);
    EXPECT_THROW(estimate_growth_exponent(samples), NumericalError);
    samples = power_samples(1.0);
    samples[2].flagged = true;
    EXPECT_THROW(estimate_growth_exponent(samples), NumericalError);
}

TEST(RunningMaximum, EnvelopeSkipsFlaggedSamples) {
    const std::vector<ResolventSample> in{
        {1, 2.0, 0, false}, {2, 1.0, 1, false}, {3, 1e300, 2, true}, {4, 5.0, 3, false}, {5, 4.0, 4, false}};
    const auto env = running_maximum(in);
    ASSERT_EQ(env.size(), 4u);
    const double norms[] = {2.0, 2.0, 5.0, 5.0};
    const int argmax[] = {0, 0, 3, 3};
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(env[i].norm, norms[i]);
        EXPECT_EQ(env[i].mode_argmax, argmax[i]);
    }
    EXPECT_EQ(env[3].lambda, 5.0);
}

TEST(OctaveMaxima, OneEntryPerOctave) {
    std::vector<ResolventSample> in;
    for (double lambda : log_grid(1.0, 8.0, 30)) in.push_back({lambda, std::sin(lambda) + 2.0, 0, false});
    const auto oct = octave_maxima(in);
    ASSERT_EQ(oct.size(), 4u);  // [1,2), [2,4), [4,8), {8}
    EXPECT_EQ(oct.back().lambda, 8.0);
}

TEST(LogGrid, EndpointsAndDensity) {
    const auto g = log_grid(1.0, 1000.0, 64);
    EXPECT_EQ(g.size(), 193u);
    EXPECT_EQ(g.front(), 1.0);
    EXPECT_EQ(g.back(), 1000.0);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_THROW(log_grid(0.0, 1.0, 4), std::invalid_argument);
}

TEST(AxisCheck, RegimesSeparate) {
    const auto grid = log_grid(1.0, 100.0, 16);
    std::vector<ModeSystem> dd, du, cons;
    for (int m : {0, 1}) {
        dd.push_back(make_system(1.0, 1.0, m));
        du.push_back(make_system(1.0, 0.0, m, 16));
        cons.push_back(make_system(0.0, 0.0, m));
    }
    EXPECT_TRUE(check_imaginary_axis_clear(dd, grid).clear);
    EXPECT_TRUE(check_imaginary_axis_clear(du, grid).clear);
    EXPECT_FALSE(check_imaginary_axis_clear(cons, grid).clear);
}

TEST(Serialization, CsvAndJsonLayouts) {
    std::ostringstream csv;
    write_csv(csv, std::vector<ResolventSample>{{1.5, 2.0, 3, false}});
    EXPECT_EQ(csv.str(), "lambda,norm,mode_argmax\n1.5,2,3\n");
    SpectrumReport rep;
    rep.pairs.push_back({Complex(-1.0, 2.0), 1e-15, 4, {}});
    std::ostringstream js;
    write_json(js, rep);
    const auto j = nlohmann::json::parse(js.str());
    EXPECT_EQ(j[0]["re"], -1.0);
    EXPECT_EQ(j[0]["im"], 2.0);
    EXPECT_EQ(j[0]["mode"], 4);
}
