#include "finres/polylog.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace finres {

namespace {

constexpr double kPi2over6 = std::numbers::pi * std::numbers::pi / 6.0;
constexpr double kZeta3 = 1.2020569031595942854;  // zeta(3)

// Direct series sum_{k>=1} z^k / k^s, terminated when a term drops below
// 1e-17 in magnitude. Converges acceptably for |z| <= 0.6.
double series(int s, double z) {
    double term = z;
    double sum = z;
    double zk = z;
    for (int k = 2; k < 10000; ++k) {
        zk *= z;
        term = s == 2 ? zk / (static_cast<double>(k) * k)
                      : zk / (static_cast<double>(k) * k * k);
        sum += term;
        if (std::abs(term) < 1e-17)
            break;
    }
    return sum;
}

// Li_2(e^u) = zeta(2) + u (1 - ln(-u)) + sum_{k>=2} zeta(2-k) u^k / k!,
// valid for u < 0, |u| < 2 pi; used for z in (0.6, 1) where |ln z| < 0.52.
// Nonzero coefficients zeta(2-k)/k! through k = 15.
double dilog_log_branch(double u) {
    // zeta(2-k)/k!; zeta at negative even integers vanishes
    static constexpr double c[] = {
        (-1.0 / 2.0) / 2.0,                      // k=2
        (-1.0 / 12.0) / 6.0,                     // k=3
        0.0,                                     // k=4
        (1.0 / 120.0) / 120.0,                   // k=5
        0.0,                                     // k=6
        (-1.0 / 252.0) / 5040.0,                 // k=7
        0.0,                                     // k=8
        (1.0 / 240.0) / 362880.0,                // k=9
        0.0,                                     // k=10
        (-1.0 / 132.0) / 39916800.0,             // k=11
        0.0,                                     // k=12
        (691.0 / 32760.0) / 6227020800.0,        // k=13
        0.0,                                     // k=14
        (-1.0 / 12.0) / 1307674368000.0,         // k=15
    };
    double sum = kPi2over6 + u * (1.0 - std::log(-u));
    double uk = u;
    for (int k = 2; k <= 15; ++k) {
        uk *= u;
        sum += c[k - 2] * uk;
    }
    return sum;
}

// Li_3(e^u) = zeta(3) + zeta(2) u + u^2/2 (3/2 - ln(-u))
//           + sum_{k>=3} zeta(3-k) u^k / k!, same validity as above.
double trilog_log_branch(double u) {
    // zeta(3-k)/k!
    static constexpr double c[] = {
        (-1.0 / 2.0) / 6.0,                      // k=3
        (-1.0 / 12.0) / 24.0,                    // k=4
        0.0,                                     // k=5
        (1.0 / 120.0) / 720.0,                   // k=6
        0.0,                                     // k=7
        (-1.0 / 252.0) / 40320.0,                // k=8
        0.0,                                     // k=9
        (1.0 / 240.0) / 3628800.0,               // k=10
        0.0,                                     // k=11
        (-1.0 / 132.0) / 479001600.0,            // k=12
        0.0,                                     // k=13
        (691.0 / 32760.0) / 87178291200.0,       // k=14
        0.0,                                     // k=15
        (-1.0 / 12.0) / 20922789888000.0,        // k=16
    };
    double sum = kZeta3 + kPi2over6 * u + 0.5 * u * u * (1.5 - std::log(-u));
    double uk = u * u;
    for (int k = 3; k <= 16; ++k) {
        uk *= u;
        sum += c[k - 3] * uk;
    }
    return sum;
}

// Positive arguments, 0 < z <= 1 (z = 1 gives zeta(s) exactly; only
// reachable internally through the duplication identity).
double eval_positive(int s, double z) {
    if (z == 1.0)
        return s == 2 ? kPi2over6 : kZeta3;
    if (z <= 0.6)
        return series(s, z);
    const double u = std::log(z);
    return s == 2 ? dilog_log_branch(u) : trilog_log_branch(u);
}

// Negative arguments z = -x, x > 0.
double eval_negative(int s, double x) {
    if (x <= 0.6)
        return series(s, -x);
    if (x <= 1.0) {
        // duplication: Li_s(-x) = 2^{1-s} Li_s(x^2) - Li_s(x)
        const double half = s == 2 ? 0.5 : 0.25;
        return half * eval_positive(s, x * x) - eval_positive(s, x);
    }
    // inversion onto -1/x in (-1, 0)
    const double lx = std::log(x);
    if (s == 2)
        return -kPi2over6 - 0.5 * lx * lx - eval_negative(2, 1.0 / x);
    return eval_negative(3, 1.0 / x) - lx * lx * lx / 6.0 - kPi2over6 * lx;
}

}  // namespace

double polylog(int s, double z) {
    if (s != 2 && s != 3)
        throw std::invalid_argument("polylog: order must be 2 or 3");
    if (!(z < 1.0))
        throw std::domain_error("polylog: argument must satisfy z < 1");
    if (z == 0.0)
        return 0.0;
    return z > 0.0 ? eval_positive(s, z) : eval_negative(s, -z);
}

double dilog(double z) { return polylog(2, z); }

double trilog(double z) { return polylog(3, z); }

double polylog_neg_exp(int s, double w) {
    if (s != 2 && s != 3)
        throw std::invalid_argument("polylog: order must be 2 or 3");
    if (w <= 30.0)
        return eval_negative(s, std::exp(w));
    // inversion identities written directly in terms of w = ln x
    const double small = eval_negative(s, std::exp(-w));
    if (s == 2)
        return -kPi2over6 - 0.5 * w * w - small;
    return small - w * w * w / 6.0 - kPi2over6 * w;
}

}  // namespace finres
