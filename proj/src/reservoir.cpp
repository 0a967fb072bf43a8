#include "finres/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "finres/errors.hpp"
#include "finres/polylog.hpp"
#include "finres/quadrature.hpp"

namespace finres {

void HarmonicTrap3D::validate() const {
    if (!(omega_x > 0.0 && omega_y > 0.0 && omega_z > 0.0))
        throw ConfigError("harmonic trap frequencies must be positive");
}

double TabulatedDos::operator()(double e) const {
    if (e <= energy.front() || e >= energy.back())
        return e == energy.front() ? density.front() : (e == energy.back() ? density.back() : 0.0);
    const auto it = std::upper_bound(energy.begin(), energy.end(), e);
    const std::size_t i = static_cast<std::size_t>(it - energy.begin());
    const double w = (e - energy[i - 1]) / (energy[i] - energy[i - 1]);
    return density[i - 1] + w * (density[i] - density[i - 1]);
}

void TabulatedDos::validate() const {
    if (energy.size() < 2 || energy.size() != density.size())
        throw ConfigError("tabulated DOS needs at least two (energy, density) pairs");
    for (std::size_t i = 1; i < energy.size(); ++i)
        if (!(energy[i] > energy[i - 1]))
            throw ConfigError("tabulated DOS energies must be strictly increasing");
    for (double d : density)
        if (!(d >= 0.0))
            throw ConfigError("tabulated DOS densities must be non-negative");
}

void ReservoirModel::validate() const {
    if (!(beta > 0.0))
        throw ConfigError("reservoir beta must be positive");
    std::visit([](const auto& d) { d.validate(); }, dos);
}

double ReservoirModel::minimum_energy() const {
    return std::visit([](const auto& d) { return d.minimum_energy(); }, dos);
}

void ReservoirModel::require_valid_mu(double mu) const {
    if (!std::isfinite(mu))
        throw std::domain_error("chemical potential must be finite");
    if (statistics == Statistics::Bose && mu >= minimum_energy() - kBoseMuGuard)
        throw std::domain_error("bosonic chemical potential must stay below E0");
}

namespace {

// Closed forms (harmonic trap): with y = -/+ e^{-beta (E0 - mu)} (- fermions,
// + bosons), per unit frequency product,
//   N(mu) = -/+ E0^2/(2 beta) ln(1 - y) +/- E0/beta^2 Li2(y) +/- 1/beta^3 Li3(y)
//   f(mu) = E0^2/2 y/(1 - y) -/+ E0/beta ln(1 - y) +/- 1/beta^2 Li2(y)
// where the upper sign set is the bosonic one. The fermionic branch is kept
// in terms of w = beta (mu - E0) so degenerate gases never overflow.
double fermi_log1p_exp(double w) {
    return w > 30.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
}

double trap_particle_number(const HarmonicTrap3D& trap, Statistics stat, double beta, double mu) {
    const double e0 = trap.minimum_energy();
    double bracket;
    if (stat == Statistics::Fermi) {
        const double w = beta * (mu - e0);
        bracket = 0.5 * e0 * e0 / beta * fermi_log1p_exp(w) -
                  e0 / (beta * beta) * polylog_neg_exp(2, w) -
                  polylog_neg_exp(3, w) / (beta * beta * beta);
    } else {
        const double y = std::exp(-beta * (e0 - mu));
        bracket = -0.5 * e0 * e0 / beta * std::log1p(-y) + e0 / (beta * beta) * dilog(y) +
                  trilog(y) / (beta * beta * beta);
    }
    return bracket / trap.frequency_product();
}

double trap_dn_dmu(const HarmonicTrap3D& trap, Statistics stat, double beta, double mu) {
    const double e0 = trap.minimum_energy();
    double bracket;
    if (stat == Statistics::Fermi) {
        const double w = beta * (mu - e0);
        const double logistic =
            w > 0.0 ? 1.0 / (1.0 + std::exp(-w)) : std::exp(w) / (1.0 + std::exp(w));
        bracket = 0.5 * e0 * e0 * logistic + e0 / beta * fermi_log1p_exp(w) -
                  polylog_neg_exp(2, w) / (beta * beta);
    } else {
        const double y = std::exp(-beta * (e0 - mu));
        bracket = 0.5 * e0 * e0 * y / (1.0 - y) - e0 / beta * std::log1p(-y) +
                  dilog(y) / (beta * beta);
    }
    return bracket / trap.frequency_product();
}

template <class Weight>
double tabulated_integral(const TabulatedDos& dos, Weight&& w) {
    // integrate knot interval by interval; the interpolant is piecewise linear
    double total = 0.0;
    for (std::size_t i = 1; i < dos.energy.size(); ++i) {
        total += integrate_adaptive([&](double e) { return dos(e) * w(e); },
                                    dos.energy[i - 1], dos.energy[i]);
    }
    return total;
}

}  // namespace

double ReservoirModel::particle_number(double mu) const {
    require_valid_mu(mu);
    if (const auto* trap = std::get_if<HarmonicTrap3D>(&dos))
        return trap_particle_number(*trap, statistics, beta, mu);
    const auto& tab = std::get<TabulatedDos>(dos);
    return tabulated_integral(tab, [&](double e) { return occupation(e, mu); });
}

double ReservoirModel::dn_dmu(double mu) const {
    require_valid_mu(mu);
    if (const auto* trap = std::get_if<HarmonicTrap3D>(&dos))
        return trap_dn_dmu(*trap, statistics, beta, mu);
    const auto& tab = std::get<TabulatedDos>(dos);
    return tabulated_integral(tab, [&](double e) { return occupation_dmu(e, mu); });
}

EquilibriumResult equilibrium_solve(double N0, int sites, double eps_s, const ReservoirModel& model,
                                    std::optional<double> mu_seed_lo,
                                    std::optional<double> mu_seed_hi) {
    if (!(N0 > 0.0))
        throw ConfigError("equilibrium_solve: N0 must be positive");
    if (sites < 0)
        throw ConfigError("equilibrium_solve: negative site count");
    model.validate();

    const double e0 = model.minimum_energy();
    const double bose_cap = e0 - std::max(kBoseMuGuard, 1e-9 / model.beta);
    const auto clamp_mu = [&](double mu) {
        return model.statistics == Statistics::Bose ? std::min(mu, bose_cap) : mu;
    };
    const auto total = [&](double mu) {
        return 2.0 * model.particle_number(mu) + sites * model.occupation(eps_s, mu);
    };

    // bracket expansion from the seed interval
    double lo = clamp_mu(mu_seed_lo.value_or(e0 - 5.0 / model.beta));
    double hi = clamp_mu(mu_seed_hi.value_or(e0 + 5.0 / model.beta));
    if (hi <= lo)
        hi = clamp_mu(lo + 1.0 / model.beta);
    if (hi <= lo)
        lo = hi - 1.0 / model.beta;
    double width = std::max(hi - lo, 1.0 / model.beta);
    for (int i = 0; i < 200 && total(lo) > N0; ++i)
        lo -= (width *= 2.0);
    width = std::max(hi - lo, 1.0 / model.beta);
    for (int i = 0; total(hi) < N0; ++i) {
        if (i >= 200 || (model.statistics == Statistics::Bose && hi >= bose_cap))
            throw NumericalError("equilibrium_solve: no bracket in the valid mu domain");
        hi = clamp_mu(hi + (width *= 2.0));
    }

    // bisection with Newton refinement; dN_total/dmu = 2 f + M g is analytic
    double mu = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double r = total(mu) - N0;
        if (std::abs(r) < 1e-9 * N0)
            break;
        (r > 0.0 ? hi : lo) = mu;
        const double slope =
            2.0 * model.dn_dmu(mu) + sites * model.occupation_dmu(eps_s, mu);
        double next = mu - r / slope;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        mu = next;
    }
    const double residual = total(mu) - N0;
    if (std::abs(residual) >= 1e-9 * N0)
        throw NumericalError("equilibrium_solve: residual did not converge");
    return {mu, model.occupation(eps_s, mu), model.particle_number(mu)};
}

}  // namespace finres
