#pragma once

#include "finres/errors.hpp"

namespace finres {

/// Uniform nearest-neighbour chain of M sites with on-site energy eps_s and
/// tunneling J, coupled to a reservoir at each end with rates gamma_l (site 1)
/// and gamma_r (site M). All energies and rates in units of J; J = 1 is the
/// conventional choice everywhere in this code base.
struct LatticeConfig {
    int sites = 0;          ///< M >= 1
    double tunneling = 1.0; ///< J > 0
    double eps_s = 0.0;     ///< on-site energy
    double gamma_l = 0.0;   ///< left coupling rate >= 0
    double gamma_r = 0.0;   ///< right coupling rate >= 0

    double gamma_bar() const { return 0.5 * (gamma_l + gamma_r); }

    void validate() const {
        if (sites < 1)
            throw ConfigError("lattice needs at least one site");
        if (!(tunneling > 0.0))
            throw ConfigError("tunneling strength must be positive");
        if (!(gamma_l >= 0.0) || !(gamma_r >= 0.0))
            throw ConfigError("coupling rates must be non-negative");
    }
};

}  // namespace finres
