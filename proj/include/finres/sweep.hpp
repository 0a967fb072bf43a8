#pragma once

#include <optional>
#include <vector>

#include "finres/config.hpp"

namespace finres {

struct SweepRow {
    int sites = 0;
    double gamma_bar = 0.0;
    double gamma_min = 0.0;
    std::optional<double> tau_rel;
    std::optional<double> alpha;     ///< equilibration rate, when a DOS is configured
    std::optional<double> rate_fit;  ///< fitted n_1 relaxation rate ("relax" task)
};

struct SweepResult {
    std::vector<SweepRow> rows;           ///< sorted by (sites, gamma_bar)
    std::optional<double> exponent;       ///< pooled M-exponent of tau_rel
    std::optional<double> prefactor;
};

/// Runs the configured Cartesian (sites x gamma_bar) grid on `workers`
/// threads. Rows are independent pure computations; the result is identical
/// for any worker count. Task "spectrum" diagonalizes the effective
/// Hamiltonian per row; "relax" also integrates a stationary-mode trajectory
/// from the empty lattice and fits the n_1 relaxation rate against gamma_min.
SweepResult run_sweep(const RunConfig& cfg, int workers);

}  // namespace finres
