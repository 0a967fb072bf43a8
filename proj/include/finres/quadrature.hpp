#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "finres/errors.hpp"

namespace finres {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993945,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.2094821410847278,
    0.2044329400752989,
    0.1903505780647854,
    0.1690047266392679,
    0.1406532597155259,
    0.1047900103222502,
    0.0630920926299786,
    0.0229353220105292,
};
// Embedded 7-point Gauss weights (nodes 0, +/-x2, +/-x4, +/-x6 above).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892767,
    0.1294849661688697,
};

template <class F>
std::pair<double, double> gauss_kronrod_15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double kronrod = kKronrodWeights[0] * f0;
    double gauss = kGaussWeights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double fp = f(c + h * kKronrodNodes[i]);
        const double fm = f(c - h * kKronrodNodes[i]);
        kronrod += kKronrodWeights[i] * (fp + fm);
        if (i % 2 == 0)
            gauss += kGaussWeights[i / 2] * (fp + fm);
    }
    return {h * kronrod, std::abs(h * (kronrod - gauss))};
}

template <class F>
double adaptive_recurse(F&& f, double a, double b, double tol, int depth) {
    auto [value, err] = gauss_kronrod_15(f, a, b);
    if (err <= tol || depth >= 48)
        return value;
    const double c = 0.5 * (a + b);
    return adaptive_recurse(f, a, c, 0.5 * tol, depth + 1) +
           adaptive_recurse(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature of f over [a, b].
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12) {
    if (!(b > a))
        return 0.0;
    auto [coarse, err] = detail::gauss_kronrod_15(f, a, b);
    const double tol = std::max(std::abs(coarse) * rel_tol, 1e-300);
    if (err <= tol)
        return coarse;
    return detail::adaptive_recurse(f, a, b, tol, 0);
}

/// Quadrature of f over [a, infinity) for integrands with an exponentially
/// decaying tail. Panels of growing width are accumulated until a panel
/// contributes less than `tail_rel` of the running total.
template <class F>
double integrate_semi_infinite(F&& f, double a, double tail_rel = 1e-14) {
    double total = 0.0;
    double lo = a;
    double width = 1.0;
    for (int panel = 0; panel < 2000; ++panel) {
        const double hi = lo + width;
        const double part = integrate_adaptive(f, lo, hi);
        total += part;
        if (panel > 2 && std::abs(part) < tail_rel * std::abs(total))
            return total;
        lo = hi;
        width *= 1.5;
    }
    throw NumericalError("integrate_semi_infinite: tail did not converge");
}

}  // namespace finres
