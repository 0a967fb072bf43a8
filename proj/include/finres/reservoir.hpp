#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "finres/statistics.hpp"

namespace finres {

/// 3D anisotropic harmonic trap in hbar = 1 units: D(eps) = eps^2 / (2 wx wy wz),
/// minimum energy E0 = (wx + wy + wz)/2. Frequencies in units of J.
struct HarmonicTrap3D {
    double omega_x = 0.0;
    double omega_y = 0.0;
    double omega_z = 0.0;

    double frequency_product() const { return omega_x * omega_y * omega_z; }
    double minimum_energy() const { return 0.5 * (omega_x + omega_y + omega_z); }
    double density(double energy) const { return energy * energy / (2.0 * frequency_product()); }
    void validate() const;
};

/// Density of states given as sampled (energy, density) pairs, linearly
/// interpolated between knots, zero outside the tabulated range. Energies
/// must be strictly increasing and densities non-negative.
struct TabulatedDos {
    std::vector<double> energy;
    std::vector<double> density;

    double minimum_energy() const { return energy.front(); }
    double maximum_energy() const { return energy.back(); }
    double operator()(double e) const;
    void validate() const;
};

using DensityOfStates = std::variant<HarmonicTrap3D, TabulatedDos>;

/// One thermal reservoir species: carrier statistics, inverse temperature
/// (units 1/J) and a density of states. Both reservoirs of a transport setup
/// share one model; only their chemical potentials differ.
struct ReservoirModel {
    Statistics statistics = Statistics::Fermi;
    double beta = 0.0;
    DensityOfStates dos{HarmonicTrap3D{}};

    void validate() const;

    /// Minimum reservoir energy E0.
    double minimum_energy() const;

    /// Thermal occupation of level `energy` at chemical potential mu.
    double occupation(double energy, double mu) const {
        return finres::occupation(energy, mu, beta, statistics);
    }

    /// d occupation / d mu.
    double occupation_dmu(double energy, double mu) const {
        return finres::occupation_dmu(energy, mu, beta, statistics);
    }

    /// Total particle number N(mu) = integral of D(eps) n(eps, mu) above E0.
    /// Closed polylog form for the harmonic trap; adaptive quadrature for a
    /// tabulated DOS. Bosons require mu < E0.
    double particle_number(double mu) const;

    /// f(mu) = dN/dmu, the susceptibility connecting dN/dt to dmu/dt.
    double dn_dmu(double mu) const;

    /// Throws std::domain_error if mu is not admissible for these statistics.
    void require_valid_mu(double mu) const;
};

/// Margin below E0 enforced for bosonic chemical potentials (condensation
/// is out of scope).
inline constexpr double kBoseMuGuard = 1e-12;

struct EquilibriumResult {
    double mu_inf = 0.0;  ///< equilibrium chemical potential
    double n_inf = 0.0;   ///< equilibrium occupation of the resonant level
    double N_inf = 0.0;   ///< equilibrium particle number per reservoir
};

/// Solves the particle-conserving equilibrium condition
///   N0 = 2 N(mu) + M n(eps_s, mu)
/// for mu, with both reservoirs sharing `model`. Bracketing bisection seeded
/// from `mu_seed_lo/hi` (expanded as needed) refined by Newton steps with the
/// analytic derivative 2 f(mu) + M g(mu, eps_s). Residual < 1e-9 N0.
EquilibriumResult equilibrium_solve(double N0, int sites, double eps_s, const ReservoirModel& model,
                                    std::optional<double> mu_seed_lo = std::nullopt,
                                    std::optional<double> mu_seed_hi = std::nullopt);

}  // namespace finres
