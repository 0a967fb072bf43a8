#include <doctest.h>

#include <cmath>

#include "finres/analysis.hpp"
#include "finres/sweep.hpp"

using namespace finres;

namespace {

RunConfig sweep_config(const std::string& task) {
    auto cfg = parse_config(R"json({
      "lattice": {"sites": 6, "eps_s": 2.0, "gamma_l": 0.5, "gamma_r": 0.5},
      "statistics": "fermi",
      "mode": "stationary",
      "reservoirs": {"beta": 1.0, "n_l0": 0.31, "n_r0": 0.214},
      "sweep": {"sites": [4, 6, 8], "gamma_bar": [0.3, 0.6]}
    })json");
    cfg.sweep->task = task;
    return cfg;
}

}  // namespace

TEST_CASE("sweep rows are worker-count independent") {
    const auto cfg = sweep_config("spectrum");
    const auto one = run_sweep(cfg, 1);
    const auto four = run_sweep(cfg, 4);
    REQUIRE(one.rows.size() == 6);
    REQUIRE(four.rows.size() == 6);
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
        CHECK(one.rows[i].sites == four.rows[i].sites);
        CHECK(one.rows[i].gamma_bar == four.rows[i].gamma_bar);
        CHECK(one.rows[i].gamma_min == four.rows[i].gamma_min);
    }
}

TEST_CASE("relax task fits the spectral rate from real trajectories") {
    const auto result = run_sweep(sweep_config("relax"), 4);
    for (const auto& row : result.rows) {
        REQUIRE(row.rate_fit.has_value());
        CHECK(*row.rate_fit == doctest::Approx(row.gamma_min).epsilon(0.01));
    }
}

TEST_CASE("sweep rows carry the per-size equilibration rate when a DOS exists") {
    auto cfg = parse_config(R"json({
      "lattice": {"sites": 6, "eps_s": 2.0, "gamma_l": 0.5, "gamma_r": 0.5},
      "statistics": "fermi",
      "mode": "finite",
      "reservoirs": {"beta": 1.0,
                     "trap": {"omega_x": 0.2, "omega_y": 0.2, "omega_z": 0.05},
                     "mu_l0": 1.2, "mu_r0": 0.7},
      "sweep": {"sites": [6], "gamma_bar": [0.5]}
    })json");
    const auto result = run_sweep(cfg, 1);
    REQUIRE(result.rows.size() == 1);
    REQUIRE(result.rows[0].alpha.has_value());
    CHECK(*result.rows[0].alpha == doctest::Approx(1.032e-4).epsilon(5e-3));
}

TEST_CASE("missing sweep section is a configuration error") {
    auto cfg = sweep_config("spectrum");
    cfg.sweep.reset();
    CHECK_THROWS_AS(run_sweep(cfg, 2), ConfigError);
}
