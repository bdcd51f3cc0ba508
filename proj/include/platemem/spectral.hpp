#pragma once

#include "platemem/mode_system.hpp"

#include <Eigen/Core>

#include <complex>
#include <ostream>
#include <vector>

namespace platemem {

using Complex = std::complex<double>;

struct StaticSolution {
    StateVector U;
    /// |-B U - M F| / |M F| in the Euclidean norm, accumulated in extended precision.
    double residual = 0.0;
};

/// Solve -A U = F, i.e. -B U = M F.
StaticSolution static_solve(const ModeSystem& system, const StateVector& F);

struct EigenPair {
    Complex value;
    double residual = 0.0;  // |B x - lambda M x|_{M^{-1}} / |x|_M
    int mode = 0;
    Eigen::VectorXcd vector;  // U coordinates
};

struct SpectrumReport {
    std::vector<EigenPair> pairs;
    double max_real_part = 0.0;
    double min_abs_real_part = 0.0;
    bool imaginary_axis_hit = false;
    int nonconverged = 0;
};

/// Fills the summary flags of `report` from its pairs with axis tolerance `tol`.
void summarize(SpectrumReport& report, double tol = 1e-9);

/// Every eigenvalue of the pencil (dense QR algorithm in energy coordinates),
/// residual-certified.
SpectrumReport spectrum(const WhitenedPencil& pencil, int mode = 0);
SpectrumReport spectrum(const ModeSystem& system);

/// The k eigenvalues closest to `shift`, from the shift-inverted operator
/// (A - shift)^{-1}. The shift is perturbed and retried if it is (numerically)
/// an eigenvalue.
SpectrumReport eigenvalues_near(const WhitenedPencil& pencil, Complex shift, int k, int mode = 0);
SpectrumReport eigenvalues_near(const ModeSystem& system, Complex shift, int k);

/// Resolvent norms above this value are flagged as eigenvalue hits.
inline constexpr double kResolventSentinel = 1e14;

/// sup_F |U|_M / |F|_M with (i lambda M - B) U = M F, i.e. 1 / sigma_min(i lambda - A).
/// Returns +inf when i lambda is numerically an eigenvalue.
double resolvent_norm(const WhitenedPencil& pencil, double lambda);
double resolvent_norm(const ModeSystem& system, double lambda);

/// Sweeps many frequencies against one pencil using a complex Schur form
/// A = Q T Q^*; each norm is the inverse smallest singular value of
/// i lambda - T, found by inverse iteration (falls back to a full SVD).
class ResolventEvaluator {
public:
    explicit ResolventEvaluator(const WhitenedPencil& pencil);
    double operator()(double lambda);
    const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }

private:
    Eigen::MatrixXcd T_;
    Eigen::VectorXcd eigenvalues_;
    Eigen::VectorXcd warm_;
};

struct ResolventSample {
    double lambda = 0.0;
    double norm = 0.0;
    int mode_argmax = 0;
    bool flagged = false;  // norm above kResolventSentinel
};

/// Per-frequency maximum over the mode set (results are truncated to these modes).
std::vector<ResolventSample> sweep_resolvent(const std::vector<ModeSystem>& systems,
                                             const std::vector<double>& lambda_grid, int threads = 1);

/// `per_decade` logarithmically spaced points on [lo, hi] (both included).
std::vector<double> log_grid(double lo, double hi, int per_decade);

/// Logarithmic grid merged with the imaginary parts of the pencil eigenvalues
/// that fall in [lo, hi], so resonance peaks are sampled.
std::vector<double> resonance_grid(const std::vector<ModeSystem>& systems, double lo, double hi, int per_decade);

struct GrowthFit {
    double alpha = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
    static constexpr double certified_ceiling = 30.0;
};

/// log |R(i lambda)| ~ c + alpha log lambda over the samples.
GrowthFit estimate_growth_exponent(const std::vector<ResolventSample>& samples);

/// Envelope M(lambda) = max over unflagged samples at frequencies <= lambda,
/// one entry per unflagged sample. This is the growth function whose power law
/// the polynomial-stability characterisation refers to.
std::vector<ResolventSample> running_maximum(const std::vector<ResolventSample>& samples);

/// Largest sample in each octave [lo 2^k, lo 2^{k+1}) of the grid.
std::vector<ResolventSample> octave_maxima(const std::vector<ResolventSample>& samples);

struct AxisCheck {
    bool clear = false;
    double min_distance = 0.0;  // min |Re| over the computed spectrum
};

AxisCheck check_imaginary_axis_clear(const std::vector<ModeSystem>& systems, const std::vector<double>& lambda_grid,
                                     double tol = 1e-9, int threads = 1);

void write_csv(std::ostream& out, const std::vector<ResolventSample>& samples);
void write_json(std::ostream& out, const SpectrumReport& report);

}  // namespace platemem
