#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finres/analysis.hpp"
#include "finres/dynamics.hpp"
#include "finres/polylog.hpp"
#include "finres/reservoir.hpp"
#include "finres/statistics.hpp"

namespace py = pybind11;
using namespace finres;

namespace {

// trajectory flattened into numpy-friendly arrays
py::dict trajectory_to_dict(const Trajectory& traj) {
    const auto n = static_cast<Eigen::Index>(traj.points.size());
    const int m = traj.lattice.sites;
    Eigen::VectorXd t(n), mu_l(n), mu_r(n), n_res_l(n), n_res_r(n), current(n), n_s(n), cons(n);
    Eigen::MatrixXd populations(n, m), currents(n, std::max(m - 1, 0));
    std::vector<Eigen::MatrixXcd> sigmas;
    sigmas.reserve(traj.points.size());
    const bool tpdm = !traj.points.empty() && traj.points.front().state.delta.has_value();
    Eigen::MatrixXd var_n(tpdm ? n : 0, tpdm ? m : 0);
    Eigen::MatrixXd var_j(tpdm ? n : 0, tpdm ? std::max(m - 1, 0) : 0);

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pt = traj.points[static_cast<std::size_t>(i)];
        t[i] = pt.state.t;
        mu_l[i] = pt.state.mu_l;
        mu_r[i] = pt.state.mu_r;
        n_res_l[i] = pt.observables.n_res_left;
        n_res_r[i] = pt.observables.n_res_right;
        current[i] = pt.observables.macroscopic_current;
        n_s[i] = pt.observables.lattice_particle_number;
        cons[i] = pt.conservation_residual;
        populations.row(i) = pt.observables.site_population;
        if (m > 1)
            currents.row(i) = pt.observables.bond_current;
        sigmas.push_back(pt.state.sigma);
        if (tpdm) {
            var_n.row(i) = *pt.observables.population_variance;
            if (m > 1)
                var_j.row(i) = *pt.observables.current_variance;
        }
    }
    py::dict out;
    out["t"] = t;
    out["mu_l"] = mu_l;
    out["mu_r"] = mu_r;
    out["n_res_left"] = n_res_l;
    out["n_res_right"] = n_res_r;
    out["site_population"] = populations;
    out["bond_current"] = currents;
    out["macroscopic_current"] = current;
    out["lattice_particle_number"] = n_s;
    out["conservation_residual"] = cons;
    out["sigma"] = sigmas;
    if (tpdm) {
        out["var_n"] = var_n;
        out["var_j"] = var_j;
    }
    out["initial_total_particles"] = traj.initial_total_particles;
    out["accepted_steps"] = traj.stats.accepted;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quantum transport across a 1D lattice between finite thermal reservoirs";

    py::enum_<Statistics>(m, "Statistics")
        .value("Bose", Statistics::Bose)
        .value("Fermi", Statistics::Fermi);

    m.def("occupation", &occupation, py::arg("energy"), py::arg("mu"), py::arg("beta"),
          py::arg("statistics"), "Thermal occupation of an energy level");
    m.def("occupation_dmu", &occupation_dmu, py::arg("energy"), py::arg("mu"), py::arg("beta"),
          py::arg("statistics"), "Derivative of the occupation with respect to mu");
    m.def("mu_for_occupation", &mu_for_occupation, py::arg("energy"), py::arg("n"),
          py::arg("beta"), py::arg("statistics"));
    m.def("polylog", &polylog, py::arg("s"), py::arg("z"), "Real polylogarithm Li_s(z), z < 1");

    py::class_<HarmonicTrap3D>(m, "HarmonicTrap3D")
        .def(py::init<double, double, double>(), py::arg("omega_x"), py::arg("omega_y"),
             py::arg("omega_z"))
        .def_readonly("omega_x", &HarmonicTrap3D::omega_x)
        .def_readonly("omega_y", &HarmonicTrap3D::omega_y)
        .def_readonly("omega_z", &HarmonicTrap3D::omega_z)
        .def("minimum_energy", &HarmonicTrap3D::minimum_energy)
        .def("density", &HarmonicTrap3D::density, py::arg("energy"));

    py::class_<ReservoirModel>(m, "ReservoirModel")
        .def(py::init([](Statistics stat, double beta, const HarmonicTrap3D& trap) {
                 return ReservoirModel{stat, beta, trap};
             }),
             py::arg("statistics"), py::arg("beta"), py::arg("trap"))
        .def_readonly("statistics", &ReservoirModel::statistics)
        .def_readonly("beta", &ReservoirModel::beta)
        .def("minimum_energy", &ReservoirModel::minimum_energy)
        .def("occupation", &ReservoirModel::occupation, py::arg("energy"), py::arg("mu"))
        .def("particle_number", &ReservoirModel::particle_number, py::arg("mu"))
        .def("dn_dmu", &ReservoirModel::dn_dmu, py::arg("mu"));

    py::class_<EquilibriumResult>(m, "EquilibriumResult")
        .def_readonly("mu_inf", &EquilibriumResult::mu_inf)
        .def_readonly("n_inf", &EquilibriumResult::n_inf)
        .def_readonly("N_inf", &EquilibriumResult::N_inf);
    m.def("equilibrium_solve", &equilibrium_solve, py::arg("N0"), py::arg("sites"),
          py::arg("eps_s"), py::arg("model"), py::arg("mu_seed_lo") = py::none(),
          py::arg("mu_seed_hi") = py::none());

    py::class_<LatticeConfig>(m, "LatticeConfig")
        .def(py::init([](int sites, double eps_s, double gamma_l, double gamma_r) {
                 LatticeConfig lat{sites, 1.0, eps_s, gamma_l, gamma_r};
                 lat.validate();
                 return lat;
             }),
             py::arg("sites"), py::arg("eps_s"), py::arg("gamma_l"), py::arg("gamma_r"))
        .def_readonly("sites", &LatticeConfig::sites)
        .def_readonly("eps_s", &LatticeConfig::eps_s)
        .def_readonly("gamma_l", &LatticeConfig::gamma_l)
        .def_readonly("gamma_r", &LatticeConfig::gamma_r);

    py::class_<NessState>(m, "NessState")
        .def_readonly("current", &NessState::current)
        .def_readonly("n_first", &NessState::n_first)
        .def_readonly("n_bulk", &NessState::n_bulk)
        .def_readonly("n_last", &NessState::n_last)
        .def_readonly("sigma", &NessState::sigma);
    m.def("ness", &ness, py::arg("delta_n"), py::arg("n_bar"), py::arg("lattice"));
    m.def("metastable_state", &metastable_state, py::arg("delta_n_t"), py::arg("n_bar_t"),
          py::arg("lattice"));

    py::class_<EffSpectrum>(m, "EffSpectrum")
        .def_readonly("eigenvalues", &EffSpectrum::eigenvalues)
        .def_readonly("decay_rates", &EffSpectrum::decay_rates)
        .def_readonly("gamma_min", &EffSpectrum::gamma_min)
        .def_readonly("tau_rel", &EffSpectrum::tau_rel);
    m.def("heff_spectrum", &heff_spectrum, py::arg("lattice"));

    py::class_<RateEstimate>(m, "RateEstimate")
        .def_readonly("alpha", &RateEstimate::alpha)
        .def_readonly("tau_eq", &RateEstimate::tau_eq);
    m.def("alpha_exact", &alpha_exact, py::arg("lattice"), py::arg("model"), py::arg("mu_inf"));
    m.def("alpha_approx", &alpha_approx, py::arg("lattice"), py::arg("delta_n0"),
          py::arg("delta_N0"));

    py::class_<ShortTimeElement>(m, "ShortTimeElement")
        .def_readonly("row", &ShortTimeElement::row)
        .def_readonly("col", &ShortTimeElement::col)
        .def_readonly("coeff", &ShortTimeElement::coeff);
    py::class_<ShortTimeSeries>(m, "ShortTimeSeries")
        .def_readonly("order", &ShortTimeSeries::order)
        .def_readonly("elements", &ShortTimeSeries::elements)
        .def_readonly("exponent_map", &ShortTimeSeries::exponent_map);
    m.def("short_time_series", &short_time_series, py::arg("lattice"), py::arg("n_left0"),
          py::arg("n_right0"), py::arg("order") = 3);

    py::class_<ExponentialFit>(m, "ExponentialFit")
        .def_readonly("rate", &ExponentialFit::rate)
        .def_readonly("amplitude", &ExponentialFit::amplitude)
        .def_readonly("rate_half_width95", &ExponentialFit::rate_half_width95)
        .def_readonly("points", &ExponentialFit::points);
    m.def(
        "fit_exponential",
        [](const std::vector<double>& t, const std::vector<double>& y, double y_inf,
           double t_begin, double t_end) {
            return fit_exponential(t, y, y_inf, t_begin, t_end);
        },
        py::arg("t"), py::arg("y"), py::arg("y_inf"), py::arg("t_begin"), py::arg("t_end"));

    m.def(
        "tau_rel_scaling",
        [](const std::vector<int>& sites, const std::vector<double>& gammas, double eps_s) {
            const auto fit = tau_rel_scaling(sites, gammas, eps_s);
            py::dict out;
            out["exponent"] = fit.exponent;
            out["prefactor"] = fit.prefactor;
            return out;
        },
        py::arg("sites"), py::arg("gamma_bar"), py::arg("eps_s") = 0.0);

    m.def(
        "simulate",
        [](const LatticeConfig& lattice, const ReservoirModel& model, double mu_l0, double mu_r0,
           const std::vector<double>& t_grid, bool tpdm, double rtol, double atol) {
            SystemState initial =
                SystemState::empty_lattice(lattice.sites, mu_l0, mu_r0, tpdm);
            IntegrationOptions opts;
            opts.ode.rtol = rtol;
            opts.ode.atol = atol;
            return trajectory_to_dict(
                integrate(initial, lattice, model, EvolutionMode::finite(), t_grid, opts));
        },
        py::arg("lattice"), py::arg("model"), py::arg("mu_l0"), py::arg("mu_r0"),
        py::arg("t_grid"), py::arg("tpdm") = false, py::arg("rtol") = 1e-9,
        py::arg("atol") = 1e-12,
        "Finite-reservoir run from an empty lattice; returns arrays keyed by observable");

    m.def(
        "simulate_stationary",
        [](const LatticeConfig& lattice, double n_left, double n_right, Statistics statistics,
           const std::vector<double>& t_grid, bool tpdm, double rtol, double atol) {
            SystemState initial = SystemState::empty_lattice(lattice.sites, 0.0, 0.0, tpdm);
            IntegrationOptions opts;
            opts.ode.rtol = rtol;
            opts.ode.atol = atol;
            return trajectory_to_dict(integrate(initial, lattice, statistics,
                                                EvolutionMode::stationary(n_left, n_right),
                                                t_grid, opts));
        },
        py::arg("lattice"), py::arg("n_left"), py::arg("n_right"), py::arg("statistics"),
        py::arg("t_grid"), py::arg("tpdm") = false, py::arg("rtol") = 1e-9,
        py::arg("atol") = 1e-12,
        "Stationary-reservoir run from an empty lattice");

    m.def("log_time_grid", &log_time_grid, py::arg("t_min"), py::arg("t_max"),
          py::arg("points_per_decade"), py::arg("max_points") = 5000);
}
