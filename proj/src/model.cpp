#include "platemem/model.hpp"

#include <cmath>

namespace platemem {

PhysicalParams validate_params(const RawParams& raw) {
    if (!std::isfinite(raw.rho) || raw.rho < 0.0)
        throw ValidationError("rho", "plate damping must be a finite value >= 0");
    if (!std::isfinite(raw.beta) || raw.beta < 0.0)
        throw ValidationError("beta", "membrane damping must be a finite value >= 0");
    if (!std::isfinite(raw.mu) || !(raw.mu > 0.0 && raw.mu < 0.5))
        throw ValidationError("mu", "Poisson ratio must lie in the open interval (0, 1/2)");
    return PhysicalParams(raw.rho, raw.beta, raw.mu);
}

AnnulusGeometry::AnnulusGeometry(double r_interface, double r_outer, Eigen::Vector2d x0)
    : r_interface_(r_interface), r_outer_(r_outer), x0_(std::move(x0)) {
    if (!std::isfinite(r_interface) || r_interface <= 0.0)
        throw ValidationError("r_interface", "must be positive");
    if (!std::isfinite(r_outer) || r_outer <= r_interface)
        throw ValidationError("r_outer", "must exceed r_interface");
    if (!x0_.allFinite())
        throw ValidationError("x0", "must be a finite point");
}

RegimeInfo damping_regime(const PhysicalParams& p) {
    const bool plate = p.rho() > 0.0;
    const bool membrane = p.beta() > 0.0;
    if (plate && membrane) return {Regime::DampedDamped, ExpectedDecay::Exponential, true};
    if (plate) return {Regime::DampedUndamped, ExpectedDecay::Polynomial, false};
    if (membrane) return {Regime::UndampedDamped, ExpectedDecay::NonExponential, false};
    return {Regime::Conservative, ExpectedDecay::Constant, false};
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::Conservative: return "conservative";
        case Regime::DampedDamped: return "damped-damped";
        case Regime::DampedUndamped: return "damped-undamped";
        case Regime::UndampedDamped: return "undamped-damped";
    }
    return "unknown";
}

std::string_view to_string(ExpectedDecay decay) {
    switch (decay) {
        case ExpectedDecay::Constant: return "constant";
        case ExpectedDecay::Exponential: return "exponential";
        case ExpectedDecay::Polynomial: return "polynomial";
        case ExpectedDecay::NonExponential: return "non-exponential";
    }
    return "unknown";
}

// On the circle |x| = R with nu = -x/R:  (x - x0).nu = -R + x0.x/R, maximised
// at x parallel to x0, giving |x0| - R.
GeometricCondition check_geometric_condition(const AnnulusGeometry& geom) {
    const double value = std::hypot(geom.x0().x(), geom.x0().y()) - geom.r_interface();
    return {value <= 0.0, value};
}

}  // namespace platemem
