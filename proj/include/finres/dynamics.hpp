#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "finres/lattice.hpp"
#include "finres/ode.hpp"
#include "finres/reservoir.hpp"

namespace finres {

using Complex = std::complex<double>;

/// Two-particle density matrix Delta_{jmkn} = <a_j^dag a_m a_k^dag a_n>,
/// stored dense, row-major in (j, m, k, n), site indices 0..M-1.
struct Tpdm {
    int sites = 0;
    std::vector<Complex> data;

    explicit Tpdm(int m = 0)
        : sites(m), data(static_cast<std::size_t>(m) * m * m * m, Complex{0.0, 0.0}) {}

    Complex& operator()(int j, int m, int k, int n) {
        return data[static_cast<std::size_t>(((j * sites + m) * sites + k)) * sites + n];
    }
    Complex operator()(int j, int m, int k, int n) const {
        return data[static_cast<std::size_t>(((j * sites + m) * sites + k)) * sites + n];
    }

    /// max |conj(Delta_jmkn) - Delta_nkmj|
    double conjugation_residual() const;
};

/// How the reservoir occupations entering the SPDM equations evolve:
/// Finite couples them to the chemical-potential rate equations, Stationary
/// freezes them at the supplied values.
struct EvolutionMode {
    enum class Kind { Finite, Stationary };
    Kind kind = Kind::Finite;
    double n_left_fixed = 0.0;
    double n_right_fixed = 0.0;

    static EvolutionMode finite() { return {Kind::Finite, 0.0, 0.0}; }
    static EvolutionMode stationary(double n_left, double n_right) {
        return {Kind::Stationary, n_left, n_right};
    }
    bool is_finite() const { return kind == Kind::Finite; }
};

/// Full integration state at one instant.
struct SystemState {
    double t = 0.0;
    Eigen::MatrixXcd sigma;            ///< SPDM, M x M Hermitian
    double mu_l = 0.0;                 ///< left chemical potential (finite mode)
    double mu_r = 0.0;                 ///< right chemical potential (finite mode)
    std::optional<Tpdm> delta;         ///< TPDM when tracked

    /// Empty lattice at t = 0.
    static SystemState empty_lattice(int sites, double mu_l = 0.0, double mu_r = 0.0,
                                     bool with_tpdm = false);
};

/// Single-time observables derived from the state (and, for variances, the TPDM).
struct Observables {
    Eigen::VectorXd site_population;               ///< n_l = sigma_ll
    Eigen::VectorXd bond_current;                  ///< j_{l,l+1}, size M-1
    double macroscopic_current = 0.0;              ///< I from the reservoir rate equations
    double lattice_particle_number = 0.0;          ///< N_S = Tr sigma
    double n_res_left = 0.0;                       ///< n_L(eps_S, t)
    double n_res_right = 0.0;                      ///< n_R(eps_S, t)
    Eigen::MatrixXd coherence_abs;                 ///< |sigma_jk|
    std::optional<Eigen::VectorXd> population_variance;  ///< Delta^2 n_l
    std::optional<Eigen::VectorXd> current_variance;     ///< Delta^2 j_{l,l+1}
};

struct IntegrationOptions {
    OdeOptions ode;
    double conservation_guard = 1e-5;  ///< relative breach that aborts a finite-mode run
    int tpdm_max_sites = 8;            ///< M^4 growth cap, override knowingly
};

struct TrajectoryPoint {
    SystemState state;
    Observables observables;
    double conservation_residual = 0.0;  ///< (N_L + N_R + N_S - N0)/N0, finite mode
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    LatticeConfig lattice;
    EvolutionMode mode;
    std::optional<ReservoirModel> model;
    double initial_total_particles = 0.0;  ///< N0, finite mode
    OdeStats stats;
};

/// d sigma / dt: coherent hopping, edge damping at plain rates gamma_{L,R},
/// and edge sources gamma n(eps_S, t). The raw SPDM equation damps with
/// [gamma^- -/+ gamma^+], but substituting the particle-conserving rates
/// gamma^+ = gamma n and gamma^- = gamma (1 +/- n) collapses it for both
/// statistics:  gamma (1 +/- n) -/+ gamma n = gamma.  Only the reservoir
/// occupations carry the statistics. Indices outside the chain are zero.
Eigen::MatrixXcd spdm_rhs(const SystemState& state, const LatticeConfig& lattice,
                          const std::optional<ReservoirModel>& model, const EvolutionMode& mode);

/// (d mu_L/dt, d mu_R/dt) = gamma_{L,R} [n_edge - n(eps_S, mu)] / f(mu). Finite mode only.
std::pair<double, double> mu_rhs(const SystemState& state, const LatticeConfig& lattice,
                                 const ReservoirModel& model);

/// d Delta / dt with the statistics-dependent source terms (+ bosons, - fermions).
Tpdm tpdm_rhs(const SystemState& state, const LatticeConfig& lattice,
              const std::optional<ReservoirModel>& model, const EvolutionMode& mode,
              Statistics statistics);

/// Observables of a state under the given mode.
Observables observables(const SystemState& state, const LatticeConfig& lattice,
                        const std::optional<ReservoirModel>& model, const EvolutionMode& mode);

/// Integrates the coupled equations from `initial`, sampling the trajectory at
/// `t_grid` (non-decreasing, >= initial.t) through the method's dense output.
/// The packed state keeps sigma Hermitian by construction; conservation is
/// monitored at every sample in finite mode and a breach beyond
/// opts.conservation_guard raises NumericalError. Statistics are taken from
/// the model; the SPDM equations do not depend on them, only the chemical
/// potential coupling and the TPDM sources do.
Trajectory integrate(const SystemState& initial, const LatticeConfig& lattice,
                     const std::optional<ReservoirModel>& model, const EvolutionMode& mode,
                     std::span<const double> t_grid, const IntegrationOptions& opts = {});

/// Stationary-mode overload without a reservoir model; `statistics` selects
/// the TPDM source signs when a TPDM is tracked.
Trajectory integrate(const SystemState& initial, const LatticeConfig& lattice,
                     Statistics statistics, const EvolutionMode& mode,
                     std::span<const double> t_grid, const IntegrationOptions& opts = {});

/// max |sigma - sigma^dag|
double hermiticity_residual(const Eigen::MatrixXcd& sigma);

/// (lowest, highest) eigenvalue of the Hermitian part of sigma.
std::pair<double, double> spdm_eigenvalue_bounds(const Eigen::MatrixXcd& sigma);

/// Log-spaced time grid with `points_per_decade` samples, capped at `max_points`
/// (thinned evenly when over the cap), starting at t_min > 0.
std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade,
                                  int max_points = 5000);

/// Linear grid of `points` samples on [t_min, t_max].
std::vector<double> linear_time_grid(double t_min, double t_max, int points);

}  // namespace finres
