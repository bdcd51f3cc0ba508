#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace platemem {

template <typename Scalar>
struct QuadratureRule {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> points;   // on [0, 1]
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n - 1.
/// Nodes from Newton iteration on P_n with the Chebyshev initial guess.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    using std::abs;
    using std::cos;
    QuadratureRule<Scalar> rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const Scalar pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Scalar x = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
        Scalar dp = 0;
        for (int it = 0; it < 100; ++it) {
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / Scalar(k);
                p0 = p1;
                p1 = pk;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n == 1 ? Scalar(1) : Scalar(n) * (x * p1 - p0) / (x * x - 1);
            const Scalar dx = p1 / dp;
            x -= dx;
            if (abs(dx) <= 4 * Eigen::NumTraits<Scalar>::epsilon()) break;
        }
        {
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / Scalar(k);
                p0 = p1;
                p1 = pk;
            }
            dp = n == 1 ? Scalar(1) : Scalar(n) * (x * p1 - p0) / (x * x - 1);
        }
        const Scalar w = Scalar(2) / ((1 - x * x) * dp * dp);
        // ascending order on [0, 1]
        rule.points(i) = (1 - x) / 2;
        rule.points(n - 1 - i) = (1 + x) / 2;
        rule.weights(i) = w / 2;
        rule.weights(n - 1 - i) = w / 2;
    }
    return rule;
}

}  // namespace platemem
