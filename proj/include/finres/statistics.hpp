#pragma once

#include <cmath>
#include <stdexcept>

namespace finres {

/// Quantum statistics of the carriers. Selects the sign in the thermal
/// occupation 1/(e^{beta(eps-mu)} -/+ 1) and in the polylog closed forms
/// for the reservoir particle number.
enum class Statistics { Bose, Fermi };

inline const char* to_string(Statistics s) {
    return s == Statistics::Bose ? "bose" : "fermi";
}

/// Thermal occupation of energy level `energy` at chemical potential `mu`,
/// n(eps) = 1/(e^{beta(eps-mu)} - 1) for bosons, 1/(e^{beta(eps-mu)} + 1)
/// for fermions. Bosons require mu < eps.
inline double occupation(double energy, double mu, double beta, Statistics stat) {
    const double x = beta * (energy - mu);
    if (stat == Statistics::Fermi) {
        // logistic form, stable for both signs of x
        if (x >= 0.0) {
            const double e = std::exp(-x);
            return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(x));
    }
    if (x <= 0.0)
        throw std::domain_error("bosonic occupation diverges: mu >= energy");
    return 1.0 / std::expm1(x);
}

/// Derivative of the occupation with respect to mu,
/// g(mu, beta, eps) = beta e^{beta(eps-mu)} / (e^{beta(eps-mu)} -/+ 1)^2,
/// evaluated as beta n (1 +/- n) which is exact and overflow-free.
inline double occupation_dmu(double energy, double mu, double beta, Statistics stat) {
    const double n = occupation(energy, mu, beta, stat);
    return stat == Statistics::Fermi ? beta * n * (1.0 - n) : beta * n * (1.0 + n);
}

/// Inverse of `occupation` in mu at fixed energy: the chemical potential
/// that produces occupation `n` of level `energy`. Fermi requires n in (0,1);
/// Bose requires n > 0.
inline double mu_for_occupation(double energy, double n, double beta, Statistics stat) {
    if (stat == Statistics::Fermi) {
        if (!(n > 0.0 && n < 1.0))
            throw std::domain_error("fermionic occupation must lie in (0,1)");
        return energy - std::log(1.0 / n - 1.0) / beta;
    }
    if (!(n > 0.0))
        throw std::domain_error("bosonic occupation must be positive");
    return energy - std::log1p(1.0 / n) / beta;
}

}  // namespace finres
