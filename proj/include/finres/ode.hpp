#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "finres/errors.hpp"

namespace finres {

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  ///< 0 selects the step automatically
    std::uint64_t max_steps = 200'000'000;
};

struct OdeStats {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t rhs_evaluations = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y) from t0 through
/// the last entry of the non-decreasing grid `t_out`. Output values are taken
/// from the method's 4th-order dense interpolant; `sink(t, y)` fires once per
/// grid point in order, `monitor(t, y)` after every accepted step.
///
/// rhs signature: void(double t, const VectorXd& y, VectorXd& dydt).
template <class Rhs, class Sink, class Monitor>
OdeStats integrate_dopri5(Rhs&& rhs, Eigen::VectorXd y, double t0, std::span<const double> t_out,
                          const OdeOptions& opts, Sink&& sink, Monitor&& monitor) {
    using Vec = Eigen::VectorXd;

    // Butcher tableau
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    OdeStats stats;
    if (t_out.empty())
        return stats;
    for (std::size_t i = 0; i < t_out.size(); ++i) {
        if (t_out[i] < t0 || (i > 0 && t_out[i] < t_out[i - 1]))
            throw ConfigError("output grid must be non-decreasing and start at or after t0");
    }
    const double t_end = t_out.back();

    const auto n = y.size();
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    Vec r1(n), r2(n), r3(n), r4(n), r5(n);

    double t = t0;
    std::size_t next_out = 0;
    while (next_out < t_out.size() && t_out[next_out] <= t0) {
        sink(t0, y);
        ++next_out;
    }
    if (next_out == t_out.size())
        return stats;

    rhs(t, y, k1);
    ++stats.rhs_evaluations;

    const auto error_norm = [&](const Vec& y0, const Vec& y1, const Vec& err) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = err[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    // automatic initial step (Hairer's hinit)
    double h = opts.initial_step;
    if (h <= 0.0) {
        double dnf = 0.0, dny = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opts.atol + opts.rtol * std::abs(y[i]);
            dnf += (k1[i] / sc) * (k1[i] / sc);
            dny += (y[i] / sc) * (y[i] / sc);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, t_end - t0);
        ytmp = y + h * k1;
        rhs(t0 + h, ytmp, k2);
        ++stats.rhs_evaluations;
        double der2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opts.atol + opts.rtol * std::abs(y[i]);
            der2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                         : std::pow(0.01 / der12, 1.0 / 5.0);
        h = std::min({100.0 * h, h1, t_end - t0, opts.max_step});
    }

    while (t < t_end && next_out < t_out.size()) {
        if (stats.accepted + stats.rejected >= opts.max_steps)
            throw NumericalError("integrate_dopri5: step budget exhausted at t = " +
                                 std::to_string(t));
        h = std::min(h, opts.max_step);
        const bool last = t + h >= t_end;
        if (last)
            h = t_end - t;
        if (t + h == t)
            throw NumericalError("integrate_dopri5: step size underflow at t = " +
                                 std::to_string(t));

        ytmp = y + h * (a21 * k1);
        rhs(t + h / 5.0, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + 3.0 * h / 10.0, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + 4.0 * h / 5.0, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + 8.0 * h / 9.0, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);  // FSAL
        stats.rhs_evaluations += 6;

        ytmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = error_norm(y, ynew, ytmp);

        if (err <= 1.0) {
            // dense interpolant over [t, t+h]
            const bool need_dense =
                next_out < t_out.size() && (t_out[next_out] <= t + h || last);
            if (need_dense) {
                r1 = y;
                r2 = ynew - y;
                r3 = h * k1 - r2;
                r4 = r2 - h * k7 - r3;
                r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_out < t_out.size() && (t_out[next_out] <= t + h || last)) {
                    const double theta = std::min((t_out[next_out] - t) / h, 1.0);
                    const double theta1 = 1.0 - theta;
                    ytmp = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
                    sink(t_out[next_out], ytmp);
                    ++next_out;
                }
            }
            t = last ? t_end : t + h;
            y.swap(ynew);
            k1.swap(k7);
            monitor(t, y);
            ++stats.accepted;
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        } else {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return stats;
}

}  // namespace finres
