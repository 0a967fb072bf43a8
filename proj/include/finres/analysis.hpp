#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "finres/dynamics.hpp"
#include "finres/lattice.hpp"
#include "finres/reservoir.hpp"

namespace finres {

/// Closed-form non-equilibrium steady state for stationary reservoirs:
/// uniform bond current, ladder populations (first / bulk / last), purely
/// imaginary nearest-neighbour coherences, nothing beyond.
struct NessState {
    double current = 0.0;
    double n_first = 0.0;
    double n_bulk = 0.0;
    double n_last = 0.0;
    Eigen::MatrixXcd sigma;
};

/// Evaluates the steady-state closed forms for bias delta_n and mean
/// occupation n_bar, builds the full SPDM fixed point, and certifies that it
/// annihilates the stationary right-hand side (residual < 1e-12). M >= 2.
NessState ness(double delta_n, double n_bar, const LatticeConfig& lattice);

/// The metastable lattice state is the same algebra evaluated at the
/// instantaneous reservoir bias delta_n(t) and mean n_bar(t).
inline NessState metastable_state(double delta_n_t, double n_bar_t,
                                  const LatticeConfig& lattice) {
    return ness(delta_n_t, n_bar_t, lattice);
}

/// Spectrum of the effective non-Hermitian single-particle Hamiltonian:
/// eps_s on the diagonal, -J on the two off-diagonals, -i gamma/2 at the
/// coupled corners. E_k = eps_k - i Gamma_k / 2.
struct EffSpectrum {
    std::vector<std::complex<double>> eigenvalues;
    std::vector<double> decay_rates;      ///< Gamma_k, ascending
    double gamma_min = 0.0;
    std::optional<double> tau_rel;        ///< absent when nothing decays (gamma = 0)
};

EffSpectrum heff_spectrum(const LatticeConfig& lattice);

struct ScalingPoint {
    int sites = 0;
    double gamma_bar = 0.0;
    double gamma_min = 0.0;
    std::optional<double> tau_rel;
    bool in_fit = false;  ///< M = 1 rows are reported but excluded
};

/// tau_rel over a (sites x gamma_bar) grid with the pooled power-law fit
/// log(tau_rel * gamma_bar) = exponent * log M + log prefactor.
struct ScalingFit {
    std::vector<ScalingPoint> table;
    double exponent = 0.0;
    double prefactor = 0.0;
    std::vector<std::pair<double, double>> per_gamma_exponent;  ///< (gamma_bar, slope)
};

ScalingFit tau_rel_scaling(std::span<const int> sites_list, std::span<const double> gamma_list,
                           double eps_s = 0.0, double tunneling = 1.0);

enum class RateMethod { Exact54, Approx61, FitFromTrajectory };

struct RateEstimate {
    double alpha = 0.0;
    std::optional<double> tau_eq;  ///< 1/alpha; absent when alpha = 0
    RateMethod method = RateMethod::Exact54;
};

/// Equilibration rate from the reservoir response at equilibrium:
/// alpha = g(mu_inf)/f(mu_inf) * 8 gL gR J^2 / ((4J^2 + gL gR)(gL + gR)).
RateEstimate alpha_exact(const LatticeConfig& lattice, const ReservoirModel& model,
                         double mu_inf);

/// Initial-condition approximation alpha ~ pref * delta_n(0) / delta_N(0).
RateEstimate alpha_approx(const LatticeConfig& lattice, double delta_n0, double delta_N0);

/// Iterative short-time solution around the empty lattice: polynomial
/// coefficients (constant..t^3) for the elements reachable at third order,
/// upper-triangle convention, 0-based indices.
struct ShortTimeElement {
    int row = 0;
    int col = 0;
    std::array<std::complex<double>, 4> coeff{};  ///< coeff[p] multiplies t^p

    std::complex<double> eval(double t) const {
        return coeff[0] + t * (coeff[1] + t * (coeff[2] + t * coeff[3]));
    }
};

struct ShortTimeSeries {
    int order = 0;
    std::vector<ShortTimeElement> elements;
    Eigen::MatrixXi exponent_map;  ///< leading power M - |j+k-(M+1)| (1-based algebra)
};

ShortTimeSeries short_time_series(const LatticeConfig& lattice, double n_left0, double n_right0,
                                  int order = 3);

struct ExponentialFit {
    double rate = 0.0;
    double amplitude = 0.0;           ///< |y - y_inf| ~ amplitude exp(-rate t)
    double rate_half_width95 = 0.0;   ///< 95% confidence half width of the rate
    double residual_rms = 0.0;        ///< rms residual of ln|y - y_inf|
    int points = 0;
};

/// Least squares on ln|y - y_inf| over t in [t_begin, t_end]. Requires at
/// least 10 points and a sign-definite y - y_inf inside the window.
ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, double y_inf,
                               double t_begin, double t_end);

/// First time the largest long-range coherence max_{|j-k|>1} |sigma_jk| drops
/// below 1e-3 of its trajectory maximum (after that maximum). Reported in run
/// metadata as the operational onset of metastability.
std::optional<double> metastability_onset(const Trajectory& trajectory);

/// Decay-rate fit window for equilibration (alpha) fits: starts 5 tau_rel
/// past the metastability onset, ends at the 1e3 * machine-epsilon noise
/// floor of |y - y_inf| (or the last sample).
struct FitWindow {
    double t_begin = 0.0;
    double t_end = 0.0;
};

FitWindow alpha_fit_window(std::span<const double> t, std::span<const double> y, double y_inf,
                           double t_star, double tau_rel);

/// Two-pass relaxation-rate fit for stationary-mode trajectories: the window
/// starts at 3/gamma_estimate and is refined once from the first-pass rate;
/// its length is capped at 12 e-folds to stay clear of the integrator noise
/// floor.
ExponentialFit fit_relaxation_rate(std::span<const double> t, std::span<const double> y,
                                   double y_inf, double gamma_estimate);

/// Nearest of {alpha, 2 alpha} to a fitted rate; returns 1 or 2.
inline int classify_rate(double fitted, double alpha) {
    return std::abs(fitted - alpha) <= std::abs(fitted - 2.0 * alpha) ? 1 : 2;
}

/// Ordinary least squares of y against x; returns slope, intercept and the
/// 95% half width of the slope.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_half_width95 = 0.0;
    double residual_rms = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace finres
