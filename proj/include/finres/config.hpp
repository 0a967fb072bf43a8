#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finres/dynamics.hpp"
#include "finres/lattice.hpp"
#include "finres/reservoir.hpp"

namespace finres {

struct OutputSpec {
    enum class Grid { Log, Linear };
    Grid grid = Grid::Log;
    double t_min = 1e-3;          ///< first sample of a log grid
    int points_per_decade = 200;  ///< log grid density
    int points = 1000;            ///< linear grid size
    int max_rows = 5000;
};

struct SweepSpec {
    std::string task = "spectrum";  ///< "spectrum" or "relax"
    std::vector<int> sites;
    std::vector<double> gamma_bar;
};

/// Fully validated run description with every derived quantity materialized.
/// Both the (mu_L0, mu_R0) and (n_L0, n_R0) representations of the initial
/// reservoir condition are populated, whichever was given.
struct RunConfig {
    LatticeConfig lattice;
    Statistics statistics = Statistics::Fermi;
    double beta = 0.0;
    std::optional<DensityOfStates> dos;
    EvolutionMode::Kind mode = EvolutionMode::Kind::Finite;
    bool tpdm = false;
    std::optional<double> t_max;
    OutputSpec output;
    OdeOptions ode;
    std::optional<SweepSpec> sweep;

    double mu_l0 = 0.0, mu_r0 = 0.0;  ///< initial chemical potentials
    double n_l0 = 0.0, n_r0 = 0.0;    ///< initial resonant-level occupations

    // derived when a DOS is present
    std::optional<double> e0;
    std::optional<double> N_l0, N_r0, N0;
    std::optional<double> N0_override;  ///< explicit "N0" key for equilibrium runs

    std::optional<ReservoirModel> model() const;
    EvolutionMode evolution_mode() const;
    std::vector<double> time_grid() const;  ///< requires t_max
    double equilibrium_N0() const;          ///< override or derived N0
};

/// Parses and validates a JSON config document. Unknown keys, missing
/// required keys, and domain violations raise ConfigError naming the key
/// path. An empty document's error lists every required key.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::filesystem::path& file);

/// Canonical single-line JSON echo of a config: parsing it back reproduces
/// the run exactly (defaults materialized, derived block included).
nlohmann::json config_echo(const RunConfig& cfg);

}  // namespace finres
