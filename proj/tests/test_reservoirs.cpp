#include <doctest.h>

#include <cmath>
#include <random>

#include "finres/quadrature.hpp"
#include "finres/reservoir.hpp"
#include "finres/statistics.hpp"

using namespace finres;

namespace {

const HarmonicTrap3D kTrap{0.2, 0.2, 0.05};  // the cold-atom trap used throughout

ReservoirModel fermi_model(double beta = 1.0) { return {Statistics::Fermi, beta, kTrap}; }
ReservoirModel bose_model(double beta = 0.7) { return {Statistics::Bose, beta, kTrap}; }

// quadrature of the defining integrals, the oracle for the closed forms
double particle_number_by_quadrature(const ReservoirModel& m, double mu) {
    const auto& trap = std::get<HarmonicTrap3D>(m.dos);
    return integrate_semi_infinite(
        [&](double e) { return trap.density(e) * m.occupation(e, mu); }, trap.minimum_energy());
}

double dn_dmu_by_quadrature(const ReservoirModel& m, double mu) {
    const auto& trap = std::get<HarmonicTrap3D>(m.dos);
    return integrate_semi_infinite(
        [&](double e) { return trap.density(e) * m.occupation_dmu(e, mu); },
        trap.minimum_energy());
}

}  // namespace

TEST_CASE("resonant-level occupations") {
    CHECK(occupation(2.0, 1.2, 1.0, Statistics::Fermi) == doctest::Approx(0.310).epsilon(2e-3));
    CHECK(occupation(2.0, 0.7, 1.0, Statistics::Fermi) == doctest::Approx(0.214).epsilon(2e-3));
    CHECK(occupation(1.7, 1.7, 3.1, Statistics::Fermi) == 0.5);
    CHECK(occupation(2.0, -0.059, 0.7, Statistics::Bose) == doctest::Approx(0.310).epsilon(2e-3));
    CHECK_THROWS_AS(occupation(1.0, 1.0, 1.0, Statistics::Bose), std::domain_error);
    CHECK_THROWS_AS(occupation(1.0, 1.5, 1.0, Statistics::Bose), std::domain_error);
}

TEST_CASE("occupation statistics limits and bounds") {
    // Boltzmann limit: both statistics agree with exp(-x) at large x
    for (double x : {30.0, 40.0, 60.0}) {
        const double boltzmann = std::exp(-x);
        CHECK(std::abs(occupation(x, 0.0, 1.0, Statistics::Fermi) - boltzmann) < 1e-12);
        CHECK(std::abs(occupation(x, 0.0, 1.0, Statistics::Bose) - boltzmann) < 1e-12);
    }
    // Pauli bound over a wide grid
    for (int i = -300; i <= 300; ++i) {
        const double n = occupation(0.01 * i, 0.0, 2.3, Statistics::Fermi);
        CHECK(n > 0.0);
        CHECK(n < 1.0);
    }
}

TEST_CASE("occupation monotone in mu") {
    double prev = 0.0;
    for (int i = 0; i <= 150; ++i) {
        const double mu = -5.0 + 7.8 * i / 150.0;  // stays below the level energy
        const double n = occupation(3.0, mu, 1.3, Statistics::Bose);
        if (i > 0)
            CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("g equals the mu-derivative of the occupation") {
    const double h = 1e-6;
    for (auto stat : {Statistics::Fermi, Statistics::Bose}) {
        for (double mu : {-1.5, 0.2, 1.1}) {
            const double g = occupation_dmu(2.0, mu, 1.0, stat);
            const double fd =
                (occupation(2.0, mu + h, 1.0, stat) - occupation(2.0, mu - h, 1.0, stat)) /
                (2.0 * h);
            CHECK(g == doctest::Approx(fd).epsilon(1e-6));
            CHECK(g > 0.0);
        }
    }
    // Fermi half filling: g = beta/4
    CHECK(occupation_dmu(2.0, 2.0, 1.7, Statistics::Fermi) ==
          doctest::Approx(1.7 / 4.0).epsilon(1e-14));
}

TEST_CASE("reservoir particle numbers reproduce the trap benchmarks") {
    CHECK(std::abs(fermi_model().particle_number(1.2) - 1276.0) < 1.0);
    CHECK(std::abs(fermi_model().particle_number(0.7) - 838.0) < 1.0);
    CHECK(std::abs(bose_model().particle_number(-0.059) - 1654.0) < 1.0);
    CHECK(std::abs(bose_model().particle_number(-0.479) - 1164.0) < 1.0);
}

TEST_CASE("closed forms agree with quadrature of the defining integrals") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> umu(-1.0, 3.0);
    std::uniform_real_distribution<double> ubeta(0.4, 2.5);
    for (int i = 0; i < 10; ++i) {
        const auto model = fermi_model(ubeta(rng));
        const double mu = umu(rng);
        CAPTURE(model.beta);
        CAPTURE(mu);
        CHECK(model.particle_number(mu) ==
              doctest::Approx(particle_number_by_quadrature(model, mu)).epsilon(1e-8));
        CHECK(model.dn_dmu(mu) ==
              doctest::Approx(dn_dmu_by_quadrature(model, mu)).epsilon(1e-8));
    }
    std::uniform_real_distribution<double> umu_bose(-2.0, kTrap.minimum_energy() - 0.05);
    for (int i = 0; i < 10; ++i) {
        const auto model = bose_model(ubeta(rng));
        const double mu = umu_bose(rng);
        CAPTURE(model.beta);
        CAPTURE(mu);
        CHECK(model.particle_number(mu) ==
              doctest::Approx(particle_number_by_quadrature(model, mu)).epsilon(1e-8));
        CHECK(model.dn_dmu(mu) ==
              doctest::Approx(dn_dmu_by_quadrature(model, mu)).epsilon(1e-8));
    }
}

TEST_CASE("f is the derivative of N and approaches D(mu) deep in the band") {
    const auto model = fermi_model();
    const double h = 1e-5;
    for (double mu : {0.4, 0.9, 1.6}) {
        const double fd =
            (model.particle_number(mu + h) - model.particle_number(mu - h)) / (2.0 * h);
        CHECK(model.dn_dmu(mu) == doctest::Approx(fd).epsilon(1e-6));
    }
    // beta J = 50: f(mu) -> D(mu) for mu well inside the band
    const auto cold = fermi_model(50.0);
    CHECK(cold.dn_dmu(2.0) == doctest::Approx(kTrap.density(2.0)).epsilon(0.01));
}

TEST_CASE("N is strictly increasing in mu") {
    const auto model = fermi_model();
    double prev = 0.0;
    for (int i = 0; i <= 120; ++i) {
        const double mu = -2.0 + 4.0 * i / 120.0;
        const double n = model.particle_number(mu);
        CHECK(n > 0.0);
        if (i > 0)
            CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("degenerate fermi gas matches the zero-temperature filling") {
    // T -> 0: N = int_{E0}^{mu} D = (mu^3 - E0^3) / (6 wx wy wz), f -> D(mu);
    // beta J = 2000 would overflow exp() without the log-space branch
    const auto cold = fermi_model(2000.0);
    const double e0 = kTrap.minimum_energy();
    for (double mu : {1.0, 2.0}) {
        const double expected = (mu * mu * mu - e0 * e0 * e0) / (6.0 * kTrap.frequency_product());
        CHECK(cold.particle_number(mu) == doctest::Approx(expected).epsilon(1e-5));
        CHECK(cold.dn_dmu(mu) == doctest::Approx(kTrap.density(mu)).epsilon(1e-5));
    }
}

TEST_CASE("bose chemical potentials are guarded at E0") {
    const auto model = bose_model();
    CHECK_THROWS_AS(model.particle_number(kTrap.minimum_energy()), std::domain_error);
    CHECK_THROWS_AS(model.dn_dmu(kTrap.minimum_energy() + 0.1), std::domain_error);
}

TEST_CASE("equilibrium of the benchmark configuration") {
    const auto eq = equilibrium_solve(2114.0, 6, 2.0, fermi_model(), 0.7, 1.2);
    CHECK(std::abs(eq.mu_inf - 0.972) < 1e-3);
    CHECK(std::abs(eq.n_inf - 0.263) < 5e-4);
    CHECK(std::abs(eq.N_inf - 1056.0) < 1.0);
    // residual of the conservation condition
    CHECK(std::abs(2.0 * eq.N_inf + 6.0 * eq.n_inf - 2114.0) < 1e-9 * 2114.0);
}

TEST_CASE("equilibrium with no lattice sites splits N0 evenly") {
    const auto model = fermi_model();
    const auto eq = equilibrium_solve(1000.0, 0, 2.0, model);
    CHECK(model.particle_number(eq.mu_inf) == doctest::Approx(500.0).epsilon(1e-9));
}

TEST_CASE("a small lattice lowers the common chemical potential") {
    // symmetric start, empty lattice: the lattice absorbs particles, so the
    // equilibrium mu must drop below the initial mu0
    const auto model = fermi_model();
    const double mu0 = 1.0;
    const double N0 = 2.0 * model.particle_number(mu0);
    for (int m : {1, 2, 4}) {
        const auto eq = equilibrium_solve(N0, m, 2.0, model, mu0, mu0);
        CHECK(eq.mu_inf < mu0);
    }
}

TEST_CASE("default seeds work without hints") {
    const auto eq = equilibrium_solve(2114.0, 6, 2.0, fermi_model());
    CHECK(std::abs(eq.mu_inf - 0.972) < 1e-3);
    const auto model = bose_model();
    const double N0 = 2.0 * model.particle_number(-0.3);
    const auto eqb = equilibrium_solve(N0, 0, 2.0, model);
    CHECK(eqb.mu_inf == doctest::Approx(-0.3).epsilon(1e-8));
}

TEST_CASE("unreachable bosonic targets raise a solver error") {
    const auto model = bose_model();
    const double n_max = model.particle_number(model.minimum_energy() - 1e-9);
    CHECK_THROWS_AS(equilibrium_solve(8.0 * n_max, 0, 2.0, model), NumericalError);
}

TEST_CASE("tabulated DOS matches the analytic trap it samples") {
    // dense sampling of the harmonic-trap DOS over the thermally relevant band
    TabulatedDos tab;
    const double e0 = kTrap.minimum_energy();
    const int knots = 4000;
    for (int i = 0; i <= knots; ++i) {
        const double e = e0 + (60.0 - e0) * i / knots;
        tab.energy.push_back(e);
        tab.density.push_back(kTrap.density(e));
    }
    const ReservoirModel analytic = fermi_model();
    const ReservoirModel tabulated{Statistics::Fermi, 1.0, tab};
    // chord interpolation of the quadratic DOS biases the integral by O(h^2)
    for (double mu : {0.7, 1.2}) {
        CHECK(tabulated.particle_number(mu) ==
              doctest::Approx(analytic.particle_number(mu)).epsilon(5e-5));
        CHECK(tabulated.dn_dmu(mu) == doctest::Approx(analytic.dn_dmu(mu)).epsilon(5e-5));
    }
}

TEST_CASE("tabulated DOS validation") {
    CHECK_THROWS_AS((TabulatedDos{{1.0, 0.5}, {1.0, 1.0}}.validate()), ConfigError);
    CHECK_THROWS_AS((TabulatedDos{{0.5, 1.0}, {1.0, -1.0}}.validate()), ConfigError);
    CHECK_THROWS_AS((TabulatedDos{{0.5}, {1.0}}.validate()), ConfigError);
}
