#include <doctest.h>

#include <cmath>

#include "finres/dynamics.hpp"

using namespace finres;

namespace {

const HarmonicTrap3D kTrap{0.2, 0.2, 0.05};

LatticeConfig chain(int m) { return {m, 1.0, 2.0, 0.5, 0.5}; }

}  // namespace

TEST_CASE("vacuum TPDM right-hand side carries only the injection sources") {
    const auto lat = chain(3);
    SystemState st = SystemState::empty_lattice(3, 0, 0, true);
    const double n_l = 0.31, n_r = 0.214;
    const auto dd = tpdm_rhs(st, lat, std::nullopt, EvolutionMode::stationary(n_l, n_r),
                             Statistics::Fermi);
    for (int j = 0; j < 3; ++j)
        for (int m = 0; m < 3; ++m)
            for (int k = 0; k < 3; ++k)
                for (int n = 0; n < 3; ++n) {
                    // with sigma = 0 only delta_{j e} delta_{n e} delta_{km} survives
                    double expected = 0.0;
                    if (j == 0 && n == 0 && k == m)
                        expected += lat.gamma_l * n_l;
                    if (j == 2 && n == 2 && k == m)
                        expected += lat.gamma_r * n_r;
                    CHECK(std::abs(dd(j, m, k, n) - expected) < 1e-15);
                }
}

TEST_CASE("fermionic on-site fluctuations stay Pauli-bounded along the flow") {
    const auto lat = chain(3);
    const ReservoirModel model{Statistics::Fermi, 1.0, kTrap};
    const auto grid = log_time_grid(1e-2, 300.0, 80);
    const auto traj = integrate(SystemState::empty_lattice(3, 1.2, 0.7, true), lat, model,
                                EvolutionMode::finite(), grid);
    for (const auto& pt : traj.points) {
        REQUIRE(pt.state.delta.has_value());
        CHECK(pt.state.delta->conjugation_residual() < 1e-9);
        for (int l = 0; l < 3; ++l) {
            const double n = pt.observables.site_population[l];
            const double var = (*pt.observables.population_variance)[l];
            // exact algebraic identity Delta_llll = sigma_ll for fermions
            CHECK(std::abs(var - n * (1.0 - n)) < 1e-8);
            CHECK(var <= 0.25 + 1e-9);
        }
    }
}

TEST_CASE("matched stationary runs separate in the variances only") {
    // identical n(eps_S): the SPDM equations coincide exactly for both
    // statistics, the TPDM sources do not
    const auto lat = chain(2);
    const auto grid = linear_time_grid(0.0, 60.0, 121);
    const auto fermi = integrate(SystemState::empty_lattice(2, 0, 0, true), lat,
                                 Statistics::Fermi, EvolutionMode::stationary(0.31, 0.214), grid);
    const auto bose = integrate(SystemState::empty_lattice(2, 0, 0, true), lat,
                                Statistics::Bose, EvolutionMode::stationary(0.31, 0.214), grid);
    for (std::size_t i = 0; i < grid.size(); i += 10) {
        const auto& sf = fermi.points[i].state.sigma;
        const auto& sb = bose.points[i].state.sigma;
        CHECK((sf - sb).cwiseAbs().maxCoeff() < 1e-10);
    }
    const auto& vf = *fermi.points.back().observables.population_variance;
    const auto& vb = *bose.points.back().observables.population_variance;
    CHECK(vb[0] > vf[0] + 0.05);
}

TEST_CASE("current variance is real and finite") {
    const auto lat = chain(3);
    const auto grid = linear_time_grid(0.0, 30.0, 61);
    const auto traj = integrate(SystemState::empty_lattice(3, 0, 0, true), lat,
                                Statistics::Bose, EvolutionMode::stationary(0.4, 0.1), grid);
    for (const auto& pt : traj.points) {
        for (int l = 0; l + 1 < 3; ++l)
            CHECK(std::isfinite((*pt.observables.current_variance)[l]));
    }
}

TEST_CASE("TPDM integration is capped by the state-size guard") {
    const LatticeConfig lat{9, 1.0, 2.0, 0.5, 0.5};
    const auto grid = linear_time_grid(0.0, 1.0, 11);
    CHECK_THROWS_AS(integrate(SystemState::empty_lattice(9, 0, 0, true), lat, Statistics::Fermi,
                              EvolutionMode::stationary(0.3, 0.2), grid),
                    ConfigError);
    IntegrationOptions opts;
    opts.tpdm_max_sites = 9;
    CHECK_NOTHROW(integrate(SystemState::empty_lattice(9, 0, 0, true), lat, Statistics::Fermi,
                            EvolutionMode::stationary(0.3, 0.2), grid, opts));
}

TEST_CASE("missing statistics for a stationary TPDM run is rejected") {
    const auto lat = chain(3);
    const auto grid = linear_time_grid(0.0, 1.0, 11);
    CHECK_THROWS_AS(integrate(SystemState::empty_lattice(3, 0, 0, true), lat, std::nullopt,
                              EvolutionMode::stationary(0.3, 0.2), grid),
                    ConfigError);
}
