#include "finres/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace finres {

namespace {

constexpr Complex kImag{0.0, 1.0};

// Packed real state: [sigma diag (M), sigma strict upper row-major (re, im)
// pairs (M(M-1))], then [mu_L, mu_R] in finite mode, then the TPDM as (re, im)
// pairs in (j, m, k, n) row-major order. Hermiticity of sigma is structural.
struct StateLayout {
    int sites = 0;
    bool finite = false;
    bool tpdm = false;

    int sigma_size() const { return sites * sites; }
    int mu_offset() const { return sigma_size(); }
    int tpdm_offset() const { return sigma_size() + (finite ? 2 : 0); }
    int total_size() const {
        const int m4 = sites * sites * sites * sites;
        return tpdm_offset() + (tpdm ? 2 * m4 : 0);
    }
};

void unpack_sigma(const StateLayout& lay, const Eigen::VectorXd& y, Eigen::MatrixXcd& sigma) {
    const int m = lay.sites;
    int pos = m;
    for (int j = 0; j < m; ++j) {
        sigma(j, j) = Complex{y[j], 0.0};
        for (int k = j + 1; k < m; ++k) {
            const Complex v{y[pos], y[pos + 1]};
            sigma(j, k) = v;
            sigma(k, j) = std::conj(v);
            pos += 2;
        }
    }
}

void pack_sigma(const StateLayout& lay, const Eigen::MatrixXcd& sigma, Eigen::VectorXd& y) {
    const int m = lay.sites;
    int pos = m;
    for (int j = 0; j < m; ++j) {
        y[j] = sigma(j, j).real();
        for (int k = j + 1; k < m; ++k) {
            y[pos] = sigma(j, k).real();
            y[pos + 1] = sigma(j, k).imag();
            pos += 2;
        }
    }
}

// Packs a sigma derivative, Hermitian-averaging to keep roundoff symmetric.
void pack_sigma_derivative(const StateLayout& lay, const Eigen::MatrixXcd& ds,
                           Eigen::VectorXd& dy) {
    const int m = lay.sites;
    int pos = m;
    for (int j = 0; j < m; ++j) {
        dy[j] = ds(j, j).real();
        for (int k = j + 1; k < m; ++k) {
            const Complex v = 0.5 * (ds(j, k) + std::conj(ds(k, j)));
            dy[pos] = v.real();
            dy[pos + 1] = v.imag();
            pos += 2;
        }
    }
}

void unpack_tpdm(const StateLayout& lay, const Eigen::VectorXd& y, Tpdm& delta) {
    const int off = lay.tpdm_offset();
    const std::size_t m4 = delta.data.size();
    for (std::size_t q = 0; q < m4; ++q)
        delta.data[q] = Complex{y[off + 2 * q], y[off + 2 * q + 1]};
}

void pack_tpdm(const StateLayout& lay, const Tpdm& delta, Eigen::VectorXd& y) {
    const int off = lay.tpdm_offset();
    for (std::size_t q = 0; q < delta.data.size(); ++q) {
        y[off + 2 * q] = delta.data[q].real();
        y[off + 2 * q + 1] = delta.data[q].imag();
    }
}

// SPDM right-hand side with explicit edge occupations.
void spdm_rhs_into(const Eigen::MatrixXcd& s, const LatticeConfig& lat, double n_left,
                   double n_right, Eigen::MatrixXcd& ds) {
    const int m = lat.sites;
    const Complex iJ = kImag * lat.tunneling;
    ds.setZero();
    if (m > 1) {
        ds.leftCols(m - 1) += iJ * s.rightCols(m - 1);   // sigma_{j,k+1}
        ds.rightCols(m - 1) += iJ * s.leftCols(m - 1);   // sigma_{j,k-1}
        ds.topRows(m - 1) -= iJ * s.bottomRows(m - 1);   // sigma_{j+1,k}
        ds.bottomRows(m - 1) -= iJ * s.topRows(m - 1);   // sigma_{j-1,k}
    }
    ds.row(0) -= 0.5 * lat.gamma_l * s.row(0);
    ds.col(0) -= 0.5 * lat.gamma_l * s.col(0);
    ds.row(m - 1) -= 0.5 * lat.gamma_r * s.row(m - 1);
    ds.col(m - 1) -= 0.5 * lat.gamma_r * s.col(m - 1);
    ds(0, 0) += lat.gamma_l * n_left;
    ds(m - 1, m - 1) += lat.gamma_r * n_right;
}

// TPDM right-hand side; pm = +1 bosons, -1 fermions.
void tpdm_rhs_into(const Tpdm& d, const Eigen::MatrixXcd& s, const LatticeConfig& lat,
                   double pm, double n_left, double n_right, Tpdm& dd) {
    const int m = lat.sites;
    const Complex iJ = kImag * lat.tunneling;
    std::fill(dd.data.begin(), dd.data.end(), Complex{0.0, 0.0});

    for (int j = 0; j < m; ++j)
        for (int mm = 0; mm < m; ++mm)
            for (int k = 0; k < m; ++k)
                for (int n = 0; n < m; ++n) {
                    Complex acc{0.0, 0.0};
                    if (mm + 1 < m) acc += d(j, mm + 1, k, n);
                    if (mm > 0) acc += d(j, mm - 1, k, n);
                    if (n + 1 < m) acc += d(j, mm, k, n + 1);
                    if (n > 0) acc += d(j, mm, k, n - 1);
                    if (j + 1 < m) acc -= d(j + 1, mm, k, n);
                    if (j > 0) acc -= d(j - 1, mm, k, n);
                    if (k + 1 < m) acc -= d(j, mm, k + 1, n);
                    if (k > 0) acc -= d(j, mm, k - 1, n);
                    dd(j, mm, k, n) = iJ * acc;
                }

    const double edge_gamma[2] = {lat.gamma_l, lat.gamma_r};
    const double edge_n[2] = {n_left, n_right};
    const int edge_site[2] = {0, m - 1};
    for (int side = 0; side < 2; ++side) {
        const double g = edge_gamma[side];
        const double nres = edge_n[side];
        const int e = edge_site[side];
        if (g == 0.0)
            continue;
        for (int j = 0; j < m; ++j)
            for (int mm = 0; mm < m; ++mm)
                for (int k = 0; k < m; ++k)
                    for (int n = 0; n < m; ++n) {
                        const int hits = (j == e) + (mm == e) + (k == e) + (n == e);
                        if (hits)
                            dd(j, mm, k, n) -= 0.5 * g * hits * d(j, mm, k, n);
                    }
        for (int j = 0; j < m; ++j)
            for (int n = 0; n < m; ++n)
                dd(j, e, e, n) += g * (1.0 + pm * nres) * s(j, n);  // loss channel
        for (int j = 0; j < m; ++j)
            for (int mm = 0; mm < m; ++mm)
                dd(j, mm, e, e) += g * nres * s(j, mm);
        for (int k = 0; k < m; ++k)
            for (int n = 0; n < m; ++n)
                dd(e, e, k, n) += g * nres * s(k, n);
        for (int mm = 0; mm < m; ++mm)
            for (int k = 0; k < m; ++k)
                dd(e, mm, k, e) += g * nres * ((k == mm ? 1.0 : 0.0) + pm * s(k, mm));
    }
}

std::pair<double, double> edge_occupations(double mu_l, double mu_r, const LatticeConfig& lat,
                                           const std::optional<ReservoirModel>& model,
                                           const EvolutionMode& mode) {
    if (!mode.is_finite())
        return {mode.n_left_fixed, mode.n_right_fixed};
    if (!model)
        throw ConfigError("finite mode requires a reservoir model");
    return {model->occupation(lat.eps_s, mu_l), model->occupation(lat.eps_s, mu_r)};
}

// Allocation-free coupled right-hand side over the packed state.
class CoupledRhs {
  public:
    CoupledRhs(const StateLayout& lay, const LatticeConfig& lat,
               const std::optional<ReservoirModel>& model, const EvolutionMode& mode,
               Statistics stat)
        : lay_(lay), lat_(lat), model_(model), mode_(mode),
          pm_(stat == Statistics::Bose ? 1.0 : -1.0), sigma_(lay.sites, lay.sites),
          dsigma_(lay.sites, lay.sites), delta_(lay.tpdm ? lay.sites : 0),
          ddelta_(lay.tpdm ? lay.sites : 0) {}

    void operator()(double /*t*/, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        unpack_sigma(lay_, y, sigma_);
        double n_l = mode_.n_left_fixed;
        double n_r = mode_.n_right_fixed;
        if (lay_.finite) {
            const double mu_l = y[lay_.mu_offset()];
            const double mu_r = y[lay_.mu_offset() + 1];
            n_l = model_->occupation(lat_.eps_s, mu_l);
            n_r = model_->occupation(lat_.eps_s, mu_r);
            const double f_l = model_->dn_dmu(mu_l);
            const double f_r = model_->dn_dmu(mu_r);
            dy[lay_.mu_offset()] = lat_.gamma_l * (sigma_(0, 0).real() - n_l) / f_l;
            dy[lay_.mu_offset() + 1] =
                lat_.gamma_r * (sigma_(lat_.sites - 1, lat_.sites - 1).real() - n_r) / f_r;
        }
        spdm_rhs_into(sigma_, lat_, n_l, n_r, dsigma_);
        pack_sigma_derivative(lay_, dsigma_, dy);
        if (lay_.tpdm) {
            unpack_tpdm(lay_, y, delta_);
            tpdm_rhs_into(delta_, sigma_, lat_, pm_, n_l, n_r, ddelta_);
            pack_tpdm(lay_, ddelta_, dy);
        }
    }

  private:
    StateLayout lay_;
    LatticeConfig lat_;
    std::optional<ReservoirModel> model_;
    EvolutionMode mode_;
    double pm_;
    Eigen::MatrixXcd sigma_, dsigma_;
    Tpdm delta_, ddelta_;
};

void check_dimensions(const SystemState& state, const LatticeConfig& lat) {
    lat.validate();
    if (state.sigma.rows() != lat.sites || state.sigma.cols() != lat.sites)
        throw ConfigError("SPDM dimension does not match the lattice size");
    if (state.delta && state.delta->sites != lat.sites)
        throw ConfigError("TPDM dimension does not match the lattice size");
}

}  // namespace

double Tpdm::conjugation_residual() const {
    double worst = 0.0;
    for (int j = 0; j < sites; ++j)
        for (int m = 0; m < sites; ++m)
            for (int k = 0; k < sites; ++k)
                for (int n = 0; n < sites; ++n)
                    worst = std::max(worst,
                                     std::abs(std::conj((*this)(j, m, k, n)) - (*this)(n, k, m, j)));
    return worst;
}

SystemState SystemState::empty_lattice(int sites, double mu_l, double mu_r, bool with_tpdm) {
    SystemState st;
    st.t = 0.0;
    st.sigma = Eigen::MatrixXcd::Zero(sites, sites);
    st.mu_l = mu_l;
    st.mu_r = mu_r;
    if (with_tpdm)
        st.delta = Tpdm(sites);
    return st;
}

Eigen::MatrixXcd spdm_rhs(const SystemState& state, const LatticeConfig& lattice,
                          const std::optional<ReservoirModel>& model, const EvolutionMode& mode) {
    check_dimensions(state, lattice);
    const auto [n_l, n_r] = edge_occupations(state.mu_l, state.mu_r, lattice, model, mode);
    Eigen::MatrixXcd ds(lattice.sites, lattice.sites);
    spdm_rhs_into(state.sigma, lattice, n_l, n_r, ds);
    return ds;
}

std::pair<double, double> mu_rhs(const SystemState& state, const LatticeConfig& lattice,
                                 const ReservoirModel& model) {
    check_dimensions(state, lattice);
    const double n_l = model.occupation(lattice.eps_s, state.mu_l);
    const double n_r = model.occupation(lattice.eps_s, state.mu_r);
    const double f_l = model.dn_dmu(state.mu_l);
    const double f_r = model.dn_dmu(state.mu_r);
    if (!(f_l > 0.0) || !(f_r > 0.0))
        throw NumericalError("mu_rhs: non-positive reservoir susceptibility");
    const int m = lattice.sites;
    return {lattice.gamma_l * (state.sigma(0, 0).real() - n_l) / f_l,
            lattice.gamma_r * (state.sigma(m - 1, m - 1).real() - n_r) / f_r};
}

Tpdm tpdm_rhs(const SystemState& state, const LatticeConfig& lattice,
              const std::optional<ReservoirModel>& model, const EvolutionMode& mode,
              Statistics statistics) {
    check_dimensions(state, lattice);
    if (!state.delta)
        throw ConfigError("tpdm_rhs: state carries no TPDM");
    const auto [n_l, n_r] = edge_occupations(state.mu_l, state.mu_r, lattice, model, mode);
    Tpdm dd(lattice.sites);
    tpdm_rhs_into(*state.delta, state.sigma, lattice,
                  statistics == Statistics::Bose ? 1.0 : -1.0, n_l, n_r, dd);
    return dd;
}

Observables observables(const SystemState& state, const LatticeConfig& lattice,
                        const std::optional<ReservoirModel>& model, const EvolutionMode& mode) {
    check_dimensions(state, lattice);
    const int m = lattice.sites;
    const auto [n_l, n_r] = edge_occupations(state.mu_l, state.mu_r, lattice, model, mode);

    Observables obs;
    obs.n_res_left = n_l;
    obs.n_res_right = n_r;
    obs.site_population.resize(m);
    for (int l = 0; l < m; ++l)
        obs.site_population[l] = state.sigma(l, l).real();
    obs.bond_current.resize(std::max(m - 1, 0));
    for (int l = 0; l + 1 < m; ++l)
        obs.bond_current[l] =
            (kImag * lattice.tunneling * (state.sigma(l + 1, l) - state.sigma(l, l + 1))).real();
    obs.lattice_particle_number = state.sigma.real().trace();
    obs.macroscopic_current = -0.5 * lattice.gamma_l * (obs.site_population[0] - n_l) +
                              0.5 * lattice.gamma_r * (obs.site_population[m - 1] - n_r);
    obs.coherence_abs = state.sigma.cwiseAbs();
    if (state.delta) {
        const Tpdm& d = *state.delta;
        Eigen::VectorXd vn(m), vj(std::max(m - 1, 0));
        for (int l = 0; l < m; ++l)
            vn[l] = (d(l, l, l, l) - state.sigma(l, l) * state.sigma(l, l)).real();
        const double J2 = lattice.tunneling * lattice.tunneling;
        for (int l = 0; l + 1 < m; ++l) {
            const Complex q = d(l + 1, l, l, l + 1) + d(l, l + 1, l + 1, l) -
                              d(l + 1, l, l + 1, l) - d(l, l + 1, l, l + 1);
            vj[l] = J2 * q.real() - obs.bond_current[l] * obs.bond_current[l];
        }
        obs.population_variance = std::move(vn);
        obs.current_variance = std::move(vj);
    }
    return obs;
}

namespace {

Trajectory integrate_impl(const SystemState& initial, const LatticeConfig& lattice,
                          const std::optional<ReservoirModel>& model, Statistics stat,
                          const EvolutionMode& mode, std::span<const double> t_grid,
                          const IntegrationOptions& opts) {
    check_dimensions(initial, lattice);
    if (mode.is_finite()) {
        if (!model)
            throw ConfigError("finite mode requires a reservoir model");
        model->validate();
        model->require_valid_mu(initial.mu_l);
        model->require_valid_mu(initial.mu_r);
    }
    if (initial.delta && lattice.sites > opts.tpdm_max_sites)
        throw ConfigError("TPDM integration capped at " + std::to_string(opts.tpdm_max_sites) +
                          " sites (M^4 state growth); raise tpdm_max_sites to override");

    StateLayout lay{lattice.sites, mode.is_finite(), initial.delta.has_value()};
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(lay.total_size());
    pack_sigma(lay, initial.sigma, y0);
    if (lay.finite) {
        y0[lay.mu_offset()] = initial.mu_l;
        y0[lay.mu_offset() + 1] = initial.mu_r;
    }
    if (lay.tpdm)
        pack_tpdm(lay, *initial.delta, y0);

    Trajectory traj;
    traj.lattice = lattice;
    traj.mode = mode;
    traj.model = model;
    if (mode.is_finite())
        traj.initial_total_particles = model->particle_number(initial.mu_l) +
                                       model->particle_number(initial.mu_r) +
                                       initial.sigma.real().trace();

    CoupledRhs rhs(lay, lattice, model, mode, stat);

    const auto emit = [&](double t, const Eigen::VectorXd& y) {
        TrajectoryPoint pt;
        pt.state.t = t;
        pt.state.sigma.resize(lattice.sites, lattice.sites);
        unpack_sigma(lay, y, pt.state.sigma);
        if (lay.finite) {
            pt.state.mu_l = y[lay.mu_offset()];
            pt.state.mu_r = y[lay.mu_offset() + 1];
        } else {
            pt.state.mu_l = pt.state.mu_r = std::numeric_limits<double>::quiet_NaN();
        }
        if (lay.tpdm) {
            pt.state.delta = Tpdm(lattice.sites);
            unpack_tpdm(lay, y, *pt.state.delta);
        }
        pt.observables = observables(pt.state, lattice, model, mode);
        if (lay.finite) {
            const double total = model->particle_number(pt.state.mu_l) +
                                 model->particle_number(pt.state.mu_r) +
                                 pt.observables.lattice_particle_number;
            pt.conservation_residual =
                (total - traj.initial_total_particles) / traj.initial_total_particles;
            if (std::abs(pt.conservation_residual) > opts.conservation_guard)
                throw NumericalError("particle conservation breached at t = " + std::to_string(t) +
                                     " (relative residual " +
                                     std::to_string(pt.conservation_residual) + ")");
        }
        traj.points.push_back(std::move(pt));
    };

    traj.stats = integrate_dopri5(rhs, std::move(y0), initial.t, t_grid, opts.ode, emit,
                                  [](double, const Eigen::VectorXd&) {});
    return traj;
}

}  // namespace

Trajectory integrate(const SystemState& initial, const LatticeConfig& lattice,
                     const std::optional<ReservoirModel>& model, const EvolutionMode& mode,
                     std::span<const double> t_grid, const IntegrationOptions& opts) {
    if (initial.delta && !model)
        throw ConfigError("TPDM integration needs the carrier statistics: pass a reservoir "
                          "model or use the Statistics overload");
    return integrate_impl(initial, lattice, model,
                          model ? model->statistics : Statistics::Fermi, mode, t_grid, opts);
}

Trajectory integrate(const SystemState& initial, const LatticeConfig& lattice,
                     Statistics statistics, const EvolutionMode& mode,
                     std::span<const double> t_grid, const IntegrationOptions& opts) {
    if (mode.is_finite())
        throw ConfigError("finite mode requires a reservoir model");
    return integrate_impl(initial, lattice, std::nullopt, statistics, mode, t_grid, opts);
}

double hermiticity_residual(const Eigen::MatrixXcd& sigma) {
    return (sigma - sigma.adjoint()).cwiseAbs().maxCoeff();
}

std::pair<double, double> spdm_eigenvalue_bounds(const Eigen::MatrixXcd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sigma);
    if (solver.info() != Eigen::Success)
        throw NumericalError("spdm_eigenvalue_bounds: eigensolver failed");
    const auto& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade,
                                  int max_points) {
    if (!(t_min > 0.0) || !(t_max > t_min) || points_per_decade < 1)
        throw ConfigError("log_time_grid: need 0 < t_min < t_max and points per decade >= 1");
    const double decades = std::log10(t_max / t_min);
    int n = static_cast<int>(std::ceil(decades * points_per_decade)) + 1;
    n = std::min(n, std::max(max_points, 2));
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] =
            t_min * std::pow(t_max / t_min, static_cast<double>(i) / (n - 1));
    grid.back() = t_max;
    return grid;
}

std::vector<double> linear_time_grid(double t_min, double t_max, int points) {
    if (!(t_max > t_min) || points < 2)
        throw ConfigError("linear_time_grid: need t_min < t_max and at least two points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] =
            t_min + (t_max - t_min) * static_cast<double>(i) / (points - 1);
    grid.back() = t_max;
    return grid;
}

}  // namespace finres
