#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "finres/analysis.hpp"
#include "finres/config.hpp"
#include "finres/dynamics.hpp"
#include "finres/errors.hpp"
#include "finres/output.hpp"
#include "finres/sweep.hpp"

namespace {

using namespace finres;
using nlohmann::json;

struct CommonOptions {
    std::string config_path;
    std::string out_path = "out.csv";
    bool tpdm = false;
    bool fit = false;
    std::optional<double> rtol, atol, t_max;
    std::optional<std::string> grid;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool sweep = false) {
    cmd->add_option("--config", opt.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", opt.out_path, "output CSV path");
    cmd->add_flag("--tpdm", opt.tpdm, "track the two-particle density matrix");
    cmd->add_flag("--fit", opt.fit, "fit decay rates and record them in the metadata");
    cmd->add_option("--rtol", opt.rtol, "integrator relative tolerance");
    cmd->add_option("--atol", opt.atol, "integrator absolute tolerance");
    cmd->add_option("--t-max", opt.t_max, "final time (units 1/J)");
    cmd->add_option("--grid", opt.grid, "output time grid")->check(CLI::IsMember({"log", "linear"}));
    if (sweep)
        cmd->add_option("--workers", opt.workers, "worker thread count")
            ->check(CLI::PositiveNumber);
}

RunConfig load_with_overrides(const CommonOptions& opt) {
    RunConfig cfg = load_config(opt.config_path);
    if (opt.tpdm)
        cfg.tpdm = true;
    if (opt.rtol)
        cfg.ode.rtol = *opt.rtol;
    if (opt.atol)
        cfg.ode.atol = *opt.atol;
    if (opt.t_max)
        cfg.t_max = *opt.t_max;
    if (opt.grid)
        cfg.output.grid =
            *opt.grid == "log" ? OutputSpec::Grid::Log : OutputSpec::Grid::Linear;
    return cfg;
}

json base_metadata(const RunConfig& cfg) {
    json meta;
    meta["schema"] = "finres metadata v1";
    meta["config"] = config_echo(cfg);
    return meta;
}

json rate_to_json(const ExponentialFit& fit) {
    return {{"rate", fit.rate},
            {"amplitude", fit.amplitude},
            {"rate_half_width95", fit.rate_half_width95},
            {"points", fit.points}};
}

// decay-rate fits of the equilibrating observables, recorded in the sidecar
json finite_run_fits(const Trajectory& traj, const RunConfig& cfg) {
    json out;
    const auto model = *cfg.model();
    const auto spec = heff_spectrum(cfg.lattice);
    const auto t_star = metastability_onset(traj);
    out["t_star"] = t_star ? json(*t_star) : json(nullptr);
    if (!t_star || !spec.tau_rel) {
        out["error"] = "metastable window not reached; no rate fits";
        return out;
    }
    const auto eq = equilibrium_solve(traj.initial_total_particles, cfg.lattice.sites,
                                      cfg.lattice.eps_s, model, std::min(cfg.mu_l0, cfg.mu_r0),
                                      std::max(cfg.mu_l0, cfg.mu_r0));
    out["equilibrium"] = {{"mu_inf", eq.mu_inf}, {"n_inf", eq.n_inf}, {"N_inf", eq.N_inf}};
    const auto alpha = alpha_exact(cfg.lattice, model, eq.mu_inf);
    out["alpha_exact"] = alpha.alpha;
    if (*cfg.N_l0 != *cfg.N_r0)
        out["alpha_approx"] =
            alpha_approx(cfg.lattice, cfg.n_l0 - cfg.n_r0, *cfg.N_l0 - *cfg.N_r0).alpha;

    const std::size_t n = traj.points.size();
    std::vector<double> t(n), dn(n), nbar(n), dN(n), j12(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pt = traj.points[i];
        t[i] = pt.state.t;
        dn[i] = pt.observables.n_res_left - pt.observables.n_res_right;
        nbar[i] = 0.5 * (pt.observables.n_res_left + pt.observables.n_res_right);
        dN[i] = model.particle_number(pt.state.mu_l) - model.particle_number(pt.state.mu_r);
        j12[i] = cfg.lattice.sites > 1 ? pt.observables.bond_current[0] : 0.0;
    }
    const auto fit_one = [&](const std::vector<double>& y, double y_inf) {
        const auto w = alpha_fit_window(t, y, y_inf, *t_star, *spec.tau_rel);
        return fit_exponential(t, y, y_inf, w.t_begin, w.t_end);
    };
    try {
        out["fits"] = {{"delta_n", rate_to_json(fit_one(dn, 0.0))},
                       {"n_bar", rate_to_json(fit_one(nbar, eq.n_inf))},
                       {"delta_N", rate_to_json(fit_one(dN, 0.0))},
                       {"current", rate_to_json(fit_one(j12, 0.0))}};
    } catch (const NumericalError& e) {
        out["error"] = e.what();
    }
    return out;
}

int cmd_trajectory(const CommonOptions& opt, bool stationary_cmd) {
    RunConfig cfg = load_with_overrides(opt);
    const bool cfg_stationary = cfg.mode == EvolutionMode::Kind::Stationary;
    if (cfg_stationary != stationary_cmd)
        throw ConfigError(stationary_cmd ? "stationary: config mode must be \"stationary\""
                                         : "simulate: config mode must be \"finite\"");

    const auto grid = cfg.time_grid();
    SystemState initial = SystemState::empty_lattice(cfg.lattice.sites, cfg.mu_l0, cfg.mu_r0,
                                                     cfg.tpdm);
    IntegrationOptions opts;
    opts.ode = cfg.ode;

    Trajectory traj;
    if (cfg.model())
        traj = integrate(initial, cfg.lattice, cfg.model(), cfg.evolution_mode(), grid, opts);
    else
        traj = integrate(initial, cfg.lattice, cfg.statistics, cfg.evolution_mode(), grid, opts);

    write_trajectory_csv(opt.out_path, traj, cfg);

    json meta = base_metadata(cfg);
    meta["integrator"] = {{"accepted_steps", traj.stats.accepted},
                          {"rejected_steps", traj.stats.rejected},
                          {"rhs_evaluations", traj.stats.rhs_evaluations}};
    if (!stationary_cmd) {
        meta["N0"] = traj.initial_total_particles;
        const auto t_star = metastability_onset(traj);
        meta["t_star"] = t_star ? json(*t_star) : json(nullptr);
        if (opt.fit)
            meta["analysis"] = finite_run_fits(traj, cfg);
    } else {
        const auto spec = heff_spectrum(cfg.lattice);
        meta["gamma_min"] = spec.gamma_min;
        meta["tau_rel"] = spec.tau_rel ? json(*spec.tau_rel) : json(nullptr);
        if (opt.fit && spec.tau_rel && cfg.lattice.sites >= 2) {
            std::vector<double> t, n1;
            for (const auto& pt : traj.points) {
                t.push_back(pt.state.t);
                n1.push_back(pt.observables.site_population[0]);
            }
            const auto target = ness(cfg.n_l0 - cfg.n_r0, 0.5 * (cfg.n_l0 + cfg.n_r0),
                                     cfg.lattice);
            meta["analysis"] = {{"n_1_relaxation",
                                 rate_to_json(fit_relaxation_rate(t, n1, target.n_first,
                                                                  spec.gamma_min))}};
        }
    }
    write_metadata(metadata_path(opt.out_path), meta);
    return 0;
}

int cmd_ness(const CommonOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto st = ness(cfg.n_l0 - cfg.n_r0, 0.5 * (cfg.n_l0 + cfg.n_r0), cfg.lattice);

    CsvTable table("finres ness v1");
    table.set_comment("config", config_echo(cfg));
    table.set_comment("j_inf", st.current);
    table.set_columns({"site", "population"});
    for (int l = 0; l < cfg.lattice.sites; ++l)
        table.add_row({static_cast<double>(l + 1), st.sigma(l, l).real()});
    table.write(opt.out_path);

    json meta = base_metadata(cfg);
    meta["j_inf"] = st.current;
    meta["n_first"] = st.n_first;
    meta["n_bulk"] = st.n_bulk;
    meta["n_last"] = st.n_last;
    write_metadata(metadata_path(opt.out_path), meta);
    return 0;
}

int cmd_spectrum(const CommonOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto spec = heff_spectrum(cfg.lattice);

    CsvTable table("finres spectrum v1");
    table.set_comment("config", config_echo(cfg));
    table.set_comment("gamma_min", spec.gamma_min);
    table.set_comment("tau_rel", spec.tau_rel ? json(*spec.tau_rel) : json(nullptr));
    table.set_columns({"k", "re_E", "im_E", "Gamma"});
    for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k)
        table.add_row({static_cast<double>(k + 1), spec.eigenvalues[k].real(),
                       spec.eigenvalues[k].imag(), -2.0 * spec.eigenvalues[k].imag()});
    table.write(opt.out_path);

    json meta = base_metadata(cfg);
    meta["gamma_min"] = spec.gamma_min;
    meta["tau_rel"] = spec.tau_rel ? json(*spec.tau_rel) : json(nullptr);
    write_metadata(metadata_path(opt.out_path), meta);
    return 0;
}

int cmd_equilibrium(const CommonOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto model = cfg.model();
    if (!model)
        throw ConfigError("equilibrium: a density of states is required");
    const auto eq = equilibrium_solve(cfg.equilibrium_N0(), cfg.lattice.sites, cfg.lattice.eps_s,
                                      *model, std::min(cfg.mu_l0, cfg.mu_r0),
                                      std::max(cfg.mu_l0, cfg.mu_r0));
    const auto alpha = alpha_exact(cfg.lattice, *model, eq.mu_inf);

    CsvTable table("finres equilibrium v1");
    table.set_comment("config", config_echo(cfg));
    table.set_columns({"N0", "mu_inf", "n_inf", "N_inf", "alpha"});
    table.add_row({cfg.equilibrium_N0(), eq.mu_inf, eq.n_inf, eq.N_inf, alpha.alpha});
    table.write(opt.out_path);

    json meta = base_metadata(cfg);
    meta["N0"] = cfg.equilibrium_N0();
    meta["mu_inf"] = eq.mu_inf;
    meta["n_inf"] = eq.n_inf;
    meta["N_inf"] = eq.N_inf;
    meta["alpha_exact"] = alpha.alpha;
    if (cfg.N_l0 && cfg.N_r0 && *cfg.N_l0 != *cfg.N_r0)
        meta["alpha_approx"] =
            alpha_approx(cfg.lattice, cfg.n_l0 - cfg.n_r0, *cfg.N_l0 - *cfg.N_r0).alpha;
    write_metadata(metadata_path(opt.out_path), meta);
    return 0;
}

int cmd_shorttime(const CommonOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto series = short_time_series(cfg.lattice, cfg.n_l0, cfg.n_r0, 3);

    CsvTable table("finres shorttime v1");
    table.set_comment("config", config_echo(cfg));
    table.set_columns({"j", "k", "exponent", "covered", "c1_re", "c1_im", "c2_re", "c2_im",
                       "c3_re", "c3_im"});
    const int m = cfg.lattice.sites;
    for (int j = 0; j < m; ++j)
        for (int k = j; k < m; ++k) {
            std::vector<double> row{static_cast<double>(j + 1), static_cast<double>(k + 1),
                                    static_cast<double>(series.exponent_map(j, k)), 0.0,
                                    0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
            for (const auto& el : series.elements)
                if (el.row == j && el.col == k) {
                    row[3] = 1.0;
                    for (int p = 1; p <= 3; ++p) {
                        row[2 + 2 * static_cast<std::size_t>(p)] = el.coeff[p].real();
                        row[3 + 2 * static_cast<std::size_t>(p)] = el.coeff[p].imag();
                    }
                }
            table.add_row(row);
        }
    table.write(opt.out_path);
    write_metadata(metadata_path(opt.out_path), base_metadata(cfg));
    return 0;
}

int cmd_sweep(const CommonOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto result = run_sweep(cfg, opt.workers);

    CsvTable table("finres sweep v1");
    table.set_comment("config", config_echo(cfg));
    if (result.exponent) {
        table.set_comment("exponent", *result.exponent);
        table.set_comment("prefactor", *result.prefactor);
    }
    const bool with_alpha = cfg.dos.has_value();
    const bool with_fit = cfg.sweep && cfg.sweep->task == "relax";
    std::vector<std::string> cols{"sites", "gamma_bar", "gamma_min", "tau_rel"};
    if (with_alpha)
        cols.push_back("alpha");
    if (with_fit)
        cols.push_back("rate_fit");
    table.set_columns(cols);
    for (const auto& row : result.rows) {
        std::vector<double> r{static_cast<double>(row.sites), row.gamma_bar, row.gamma_min,
                              row.tau_rel.value_or(0.0)};
        if (with_alpha)
            r.push_back(row.alpha.value_or(0.0));
        if (with_fit)
            r.push_back(row.rate_fit.value_or(0.0));
        table.add_row(r);
    }
    table.write(opt.out_path);

    json meta = base_metadata(cfg);
    meta["exponent"] = result.exponent ? json(*result.exponent) : json(nullptr);
    meta["prefactor"] = result.prefactor ? json(*result.prefactor) : json(nullptr);
    write_metadata(metadata_path(opt.out_path), meta);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finres: quantum transport across a lattice between finite thermal reservoirs"};
    app.require_subcommand(1);

    CommonOptions opt;
    auto* simulate = app.add_subcommand("simulate", "finite-reservoir trajectory");
    add_common(simulate, opt);
    auto* stationary = app.add_subcommand("stationary", "stationary-reservoir trajectory");
    add_common(stationary, opt);
    auto* ness_cmd = app.add_subcommand("ness", "closed-form steady state");
    add_common(ness_cmd, opt);
    auto* spectrum = app.add_subcommand("spectrum", "effective-Hamiltonian decay spectrum");
    add_common(spectrum, opt);
    auto* equilibrium = app.add_subcommand("equilibrium", "particle-conserving equilibrium");
    add_common(equilibrium, opt);
    auto* shorttime = app.add_subcommand("shorttime", "short-time polynomial coefficients");
    add_common(shorttime, opt);
    auto* sweep = app.add_subcommand("sweep", "parameter-grid sweep");
    add_common(sweep, opt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed())
            return cmd_trajectory(opt, false);
        if (stationary->parsed())
            return cmd_trajectory(opt, true);
        if (ness_cmd->parsed())
            return cmd_ness(opt);
        if (spectrum->parsed())
            return cmd_spectrum(opt);
        if (equilibrium->parsed())
            return cmd_equilibrium(opt);
        if (shorttime->parsed())
            return cmd_shorttime(opt);
        if (sweep->parsed())
            return cmd_sweep(opt);
    } catch (const finres::ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return 2;
    } catch (const finres::IoError& e) {
        std::cerr << "error[io]: " << e.what() << "\n";
        return 4;
    } catch (const finres::NumericalError& e) {
        std::cerr << "error[numerical]: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error[numerical]: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
