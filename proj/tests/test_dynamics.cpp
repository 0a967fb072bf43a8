#include <doctest.h>

#include <cmath>
#include <random>

#include "finres/analysis.hpp"
#include "finres/dynamics.hpp"

using namespace finres;

namespace {

const HarmonicTrap3D kTrap{0.2, 0.2, 0.05};

ReservoirModel benchmark_model() { return {Statistics::Fermi, 1.0, kTrap}; }

LatticeConfig benchmark_lattice() { return {6, 1.0, 2.0, 0.5, 0.5}; }

// Hermitian matrix with prescribed eigenvalue range, for property tests
Eigen::MatrixXcd random_spdm(int m, std::mt19937& rng, double lo, double hi) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            a(i, j) = Complex{gauss(rng), gauss(rng)};
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    const Eigen::MatrixXcd q = qr.householderQ();
    std::uniform_real_distribution<double> uval(lo, hi);
    Eigen::VectorXd d(m);
    for (int i = 0; i < m; ++i)
        d[i] = uval(rng);
    return q * d.asDiagonal() * q.adjoint();
}

}  // namespace

TEST_CASE("single site charges up analytically") {
    const LatticeConfig lat{1, 1.0, 2.0, 0.3, 0.2};
    const double n0 = 0.4;
    const auto grid = linear_time_grid(0.0, 8.0, 200);
    const auto traj = integrate(SystemState::empty_lattice(1), lat, Statistics::Fermi,
                                EvolutionMode::stationary(n0, n0), grid);
    const double g = lat.gamma_l + lat.gamma_r;
    for (const auto& pt : traj.points) {
        const double expected = n0 * (1.0 - std::exp(-g * pt.state.t));
        CHECK(pt.observables.site_population[0] == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("empty-lattice right-hand side has only the two source entries") {
    const auto lat = benchmark_lattice();
    SystemState st = SystemState::empty_lattice(6);
    const auto ds = spdm_rhs(st, lat, std::nullopt, EvolutionMode::stationary(0.31, 0.214));
    for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) {
            if (j == 0 && k == 0)
                CHECK(ds(j, k).real() == doctest::Approx(0.5 * 0.31));
            else if (j == 5 && k == 5)
                CHECK(ds(j, k).real() == doctest::Approx(0.5 * 0.214));
            else
                CHECK(std::abs(ds(j, k)) == 0.0);
        }
}

TEST_CASE("both reservoirs feed the empty lattice") {
    SystemState st = SystemState::empty_lattice(6, 1.2, 0.7);
    const auto [dmu_l, dmu_r] = mu_rhs(st, benchmark_lattice(), benchmark_model());
    CHECK(dmu_l < 0.0);
    CHECK(dmu_r < 0.0);
}

TEST_CASE("detailed balance at the contact stalls the reservoir") {
    const auto model = benchmark_model();
    SystemState st = SystemState::empty_lattice(6, 1.2, 0.7);
    st.sigma(0, 0) = model.occupation(2.0, 1.2);
    const auto [dmu_l, dmu_r] = mu_rhs(st, benchmark_lattice(), model);
    CHECK(dmu_l == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(dmu_r < 0.0);
}

TEST_CASE("exchange with the reservoirs balances identically") {
    // f(mu_L) mu_L' + f(mu_R) mu_R' + d(Tr sigma)/dt = 0 is an algebraic
    // identity of the coupled equations, at any state
    const auto lat = benchmark_lattice();
    const auto model = benchmark_model();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> umu(0.2, 1.8);
    for (int trial = 0; trial < 25; ++trial) {
        SystemState st;
        st.sigma = random_spdm(6, rng, 0.0, 1.0);
        st.mu_l = umu(rng);
        st.mu_r = umu(rng);
        const auto ds = spdm_rhs(st, lat, model, EvolutionMode::finite());
        const auto [dmu_l, dmu_r] = mu_rhs(st, lat, model);
        const double balance = model.dn_dmu(st.mu_l) * dmu_l + model.dn_dmu(st.mu_r) * dmu_r +
                               ds.real().trace();
        CHECK(std::abs(balance) < 1e-12);
    }
}

TEST_CASE("edge-site balance ties the populations to the currents") {
    // n_1' - n_M' = -j_12 - j_{M-1,M} + 2 I, derived from the SPDM equations
    const auto lat = benchmark_lattice();
    std::mt19937 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        SystemState st;
        st.sigma = random_spdm(6, rng, 0.0, 1.0);
        const auto mode = EvolutionMode::stationary(0.31, 0.214);
        const auto ds = spdm_rhs(st, lat, std::nullopt, mode);
        const auto obs = observables(st, lat, std::nullopt, mode);
        const double lhs = ds(0, 0).real() - ds(5, 5).real();
        const double rhs = -obs.bond_current[0] - obs.bond_current[4] +
                           2.0 * obs.macroscopic_current;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("stationary run relaxes onto the closed-form steady state") {
    const auto lat = benchmark_lattice();
    const auto ness_state = ness(0.310 - 0.214, 0.5 * (0.310 + 0.214), lat);
    IntegrationOptions opts;
    opts.ode.rtol = 1e-11;
    opts.ode.atol = 1e-14;
    const auto grid = linear_time_grid(0.0, 400.0, 401);
    const auto traj = integrate(SystemState::empty_lattice(6), lat, Statistics::Fermi,
                                EvolutionMode::stationary(0.310, 0.214), grid, opts);
    const auto& last = traj.points.back().state.sigma;
    CHECK((last - ness_state.sigma).cwiseAbs().maxCoeff() < 1e-8);
    // uniform current at the NESS
    const auto& obs = traj.points.back().observables;
    for (int l = 0; l + 1 < 6; ++l)
        CHECK(obs.bond_current[l] == doctest::Approx(ness_state.current).epsilon(1e-6));
}

TEST_CASE("the steady state annihilates the stationary right-hand side") {
    const auto lat = benchmark_lattice();
    const auto st = ness(0.096, 0.262, lat);
    SystemState probe;
    probe.sigma = st.sigma;
    const auto ds =
        spdm_rhs(probe, lat, std::nullopt, EvolutionMode::stationary(0.310, 0.214));
    CHECK(ds.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("short finite-reservoir run conserves particles and stays Fermi-consistent") {
    const auto lat = benchmark_lattice();
    const auto model = benchmark_model();
    const auto grid = log_time_grid(1e-2, 2e3, 60);
    const auto traj = integrate(SystemState::empty_lattice(6, 1.2, 0.7), lat, model,
                                EvolutionMode::finite(), grid);
    for (const auto& pt : traj.points) {
        CHECK(std::abs(pt.conservation_residual) < 1e-6);
        CHECK(hermiticity_residual(pt.state.sigma) < 1e-10);
        const auto [lo, hi] = spdm_eigenvalue_bounds(pt.state.sigma);
        CHECK(lo > -1e-9);
        CHECK(hi < 1.0 + 1e-9);
    }
}

TEST_CASE("vacuum start keeps the real/imaginary checkerboard") {
    // empty lattice: sigma_jk real for even j+k, imaginary for odd j+k
    const auto lat = benchmark_lattice();
    const auto grid = log_time_grid(1e-2, 50.0, 40);
    const auto traj = integrate(SystemState::empty_lattice(6), lat, Statistics::Fermi,
                                EvolutionMode::stationary(0.310, 0.214), grid);
    for (const auto& pt : traj.points)
        for (int j = 0; j < 6; ++j)
            for (int k = 0; k < 6; ++k) {
                // 0-based parity: even (j+k+2) means even 1-based sum
                if ((j + k) % 2 == 0)
                    CHECK(std::abs(pt.state.sigma(j, k).imag()) < 1e-9);
                else
                    CHECK(std::abs(pt.state.sigma(j, k).real()) < 1e-9);
            }
}

TEST_CASE("continuity holds at interior sites along a trajectory") {
    const auto lat = benchmark_lattice();
    const auto grid = linear_time_grid(0.0, 30.0, 3001);
    const auto traj = integrate(SystemState::empty_lattice(6), lat, Statistics::Fermi,
                                EvolutionMode::stationary(0.310, 0.214), grid);
    const double h = traj.points[1].state.t - traj.points[0].state.t;
    for (std::size_t i = 1; i + 1 < traj.points.size(); i += 50) {
        for (int l = 1; l < 5; ++l) {
            const double dn_dt = (traj.points[i + 1].observables.site_population[l] -
                                  traj.points[i - 1].observables.site_population[l]) /
                                 (2.0 * h);
            const double flux = traj.points[i].observables.bond_current[l - 1] -
                                traj.points[i].observables.bond_current[l];
            CHECK(dn_dt == doctest::Approx(flux).epsilon(5e-3).scale(1.0));
        }
    }
}

TEST_CASE("swapping the reservoirs mirrors the lattice") {
    LatticeConfig lat{5, 1.0, 2.0, 0.7, 0.2};
    LatticeConfig swapped = lat;
    std::swap(swapped.gamma_l, swapped.gamma_r);
    const auto grid = linear_time_grid(0.0, 40.0, 81);
    const auto a = integrate(SystemState::empty_lattice(5), lat, Statistics::Fermi,
                             EvolutionMode::stationary(0.31, 0.214), grid);
    const auto b = integrate(SystemState::empty_lattice(5), swapped, Statistics::Fermi,
                             EvolutionMode::stationary(0.214, 0.31), grid);
    for (std::size_t i = 0; i < grid.size(); i += 8) {
        const auto& sa = a.points[i].state.sigma;
        const auto& sb = b.points[i].state.sigma;
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k)
                CHECK(std::abs(sb(j, k) - sa(4 - j, 4 - k)) < 1e-9);
        // populations reverse, currents reverse and negate
        for (int l = 0; l + 1 < 5; ++l)
            CHECK(b.points[i].observables.bond_current[l] ==
                  doctest::Approx(-a.points[i].observables.bond_current[3 - l]).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("real symmetric SPDM carries no current") {
    const auto lat = benchmark_lattice();
    SystemState st;
    st.sigma = Eigen::MatrixXcd::Zero(6, 6);
    for (int j = 0; j < 6; ++j) {
        st.sigma(j, j) = 0.3;
        if (j + 1 < 6) {
            st.sigma(j, j + 1) = 0.05;
            st.sigma(j + 1, j) = 0.05;
        }
    }
    const auto obs = observables(st, lat, std::nullopt, EvolutionMode::stationary(0.3, 0.2));
    for (int l = 0; l + 1 < 6; ++l)
        CHECK(obs.bond_current[l] == 0.0);
}

TEST_CASE("dimension mismatches are configuration errors") {
    SystemState st = SystemState::empty_lattice(4);
    CHECK_THROWS_AS(
        spdm_rhs(st, benchmark_lattice(), std::nullopt, EvolutionMode::stationary(0.3, 0.2)),
        ConfigError);
    const auto grid = linear_time_grid(0.0, 1.0, 11);
    CHECK_THROWS_AS(integrate(st, benchmark_lattice(), Statistics::Fermi,
                              EvolutionMode::stationary(0.3, 0.2), grid),
                    ConfigError);
    CHECK_THROWS_AS(integrate(SystemState::empty_lattice(6, 1.2, 0.7), benchmark_lattice(),
                              std::nullopt, EvolutionMode::finite(), grid),
                    ConfigError);
}

TEST_CASE("integrator reproduces a stiff-free oscillator to tolerance") {
    // y'' = -w^2 y integrated as a first-order pair; exercises the dense
    // interpolant away from any physics
    const double w = 3.7;
    const auto rhs = [w](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
    };
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i)
        grid.push_back(0.17 * i);
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    double worst = 0.0;
    integrate_dopri5(
        rhs, y0, 0.0, grid, opts,
        [&](double t, const Eigen::VectorXd& y) {
            worst = std::max(worst, std::abs(y[0] - std::cos(w * t)));
        },
        [](double, const Eigen::VectorXd&) {});
    CHECK(worst < 1e-7);
}

TEST_CASE("dense output hits requested times exactly once in order") {
    const auto lat = benchmark_lattice();
    const auto grid = log_time_grid(1e-3, 10.0, 25);
    const auto traj = integrate(SystemState::empty_lattice(6), lat, Statistics::Fermi,
                                EvolutionMode::stationary(0.31, 0.214), grid);
    REQUIRE(traj.points.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(traj.points[i].state.t == grid[i]);
}
