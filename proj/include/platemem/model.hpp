#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace platemem {

/// Raised when a parameter record violates a model hypothesis. `field()` names
/// the offending entry so front-ends can report it verbatim.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised by numerical kernels when a factorization or fit cannot proceed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawParams {
    double rho = 0.0;
    double beta = 0.0;
    double mu = 0.3;
};

/// Damping coefficients and Poisson ratio. Only constructible through
/// validate_params, so every instance satisfies rho, beta >= 0 and 0 < mu < 1/2.
class PhysicalParams {
public:
    double rho() const noexcept { return rho_; }
    double beta() const noexcept { return beta_; }
    double mu() const noexcept { return mu_; }

private:
    friend PhysicalParams validate_params(const RawParams&);
    PhysicalParams(double rho, double beta, double mu) : rho_(rho), beta_(beta), mu_(mu) {}
    double rho_, beta_, mu_;
};

PhysicalParams validate_params(const RawParams& raw);

/// Plate on the annulus r_interface < r < r_outer, membrane on the disk
/// r < r_interface, both centred at the origin. `x0` is the multiplier centre
/// q(x) = x - x0 used by the geometric condition on the interface.
class AnnulusGeometry {
public:
    AnnulusGeometry(double r_interface, double r_outer, Eigen::Vector2d x0 = Eigen::Vector2d::Zero());

    double r_interface() const noexcept { return r_interface_; }
    double r_outer() const noexcept { return r_outer_; }
    const Eigen::Vector2d& x0() const noexcept { return x0_; }

private:
    double r_interface_, r_outer_;
    Eigen::Vector2d x0_;
};

enum class Regime { Conservative, DampedDamped, DampedUndamped, UndampedDamped };

enum class ExpectedDecay { Constant, Exponential, Polynomial, NonExponential };

struct RegimeInfo {
    Regime regime;
    ExpectedDecay expected;
    bool exponentially_stable;
};

RegimeInfo damping_regime(const PhysicalParams& params);

std::string_view to_string(Regime regime);
std::string_view to_string(ExpectedDecay decay);

struct GeometricCondition {
    bool satisfied;
    /// max over the interface circle of (x - x0) . nu(x), nu = -e_r on the interface.
    double max_q_dot_nu;
};

GeometricCondition check_geometric_condition(const AnnulusGeometry& geom);

}  // namespace platemem
