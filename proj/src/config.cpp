#include "finres/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finres/errors.hpp"

namespace finres {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& required, const std::set<std::string>& optional) {
    for (const auto& item : obj.items()) {
        if (!required.contains(item.key()) && !optional.contains(item.key()))
            fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
    }
    for (const auto& key : required) {
        if (!obj.contains(key))
            fail(path.empty() ? key : path + "." + key, "missing required key");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        fail(path.empty() ? key : path + "." + key, "expected a number");
    return v.get<double>();
}

}  // namespace

std::optional<ReservoirModel> RunConfig::model() const {
    if (!dos)
        return std::nullopt;
    return ReservoirModel{statistics, beta, *dos};
}

EvolutionMode RunConfig::evolution_mode() const {
    return mode == EvolutionMode::Kind::Finite ? EvolutionMode::finite()
                                               : EvolutionMode::stationary(n_l0, n_r0);
}

std::vector<double> RunConfig::time_grid() const {
    if (!t_max)
        throw ConfigError("config: t_max: missing required key for trajectory runs");
    if (output.grid == OutputSpec::Grid::Log)
        return log_time_grid(output.t_min, *t_max, output.points_per_decade, output.max_rows);
    return linear_time_grid(0.0, *t_max, std::min(output.points, output.max_rows));
}

double RunConfig::equilibrium_N0() const {
    if (N0_override)
        return *N0_override;
    if (N0)
        return *N0;
    throw ConfigError("config: N0: equilibrium needs a DOS-derived or explicit N0");
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.empty())
        throw ConfigError(
            "config: empty document; required keys: lattice{sites, eps_s, gamma_l, gamma_r}, "
            "statistics, reservoirs{beta, mu_l0+mu_r0 or n_l0+n_r0, trap or dos_table}, mode");

    require_keys(doc, "", {"lattice", "statistics", "reservoirs", "mode"},
                 {"tpdm", "t_max", "output", "integrator", "sweep", "N0", "derived"});

    RunConfig cfg;

    const auto& lat = doc.at("lattice");
    require_keys(lat, "lattice", {"sites", "eps_s", "gamma_l", "gamma_r"}, {});
    cfg.lattice.sites = lat.at("sites").get<int>();
    cfg.lattice.eps_s = get_number(lat, "lattice", "eps_s");
    cfg.lattice.gamma_l = get_number(lat, "lattice", "gamma_l");
    cfg.lattice.gamma_r = get_number(lat, "lattice", "gamma_r");
    cfg.lattice.tunneling = 1.0;  // all energies in units of J
    try {
        cfg.lattice.validate();
    } catch (const ConfigError& e) {
        fail("lattice", e.what());
    }

    const std::string stat = doc.at("statistics").get<std::string>();
    if (stat == "fermi")
        cfg.statistics = Statistics::Fermi;
    else if (stat == "bose")
        cfg.statistics = Statistics::Bose;
    else
        fail("statistics", "expected \"fermi\" or \"bose\"");

    const std::string mode = doc.at("mode").get<std::string>();
    if (mode == "finite")
        cfg.mode = EvolutionMode::Kind::Finite;
    else if (mode == "stationary")
        cfg.mode = EvolutionMode::Kind::Stationary;
    else
        fail("mode", "expected \"finite\" or \"stationary\"");

    const auto& res = doc.at("reservoirs");
    require_keys(res, "reservoirs", {"beta"},
                 {"trap", "dos_table", "mu_l0", "mu_r0", "n_l0", "n_r0"});
    cfg.beta = get_number(res, "reservoirs", "beta");
    if (!(cfg.beta > 0.0))
        fail("reservoirs.beta", "must be positive");

    if (res.contains("trap") && res.contains("dos_table"))
        fail("reservoirs", "give either trap or dos_table, not both");
    if (res.contains("trap")) {
        const auto& trap = res.at("trap");
        require_keys(trap, "reservoirs.trap", {"omega_x", "omega_y", "omega_z"}, {});
        HarmonicTrap3D t{get_number(trap, "reservoirs.trap", "omega_x"),
                         get_number(trap, "reservoirs.trap", "omega_y"),
                         get_number(trap, "reservoirs.trap", "omega_z")};
        try {
            t.validate();
        } catch (const ConfigError& e) {
            fail("reservoirs.trap", e.what());
        }
        cfg.dos = t;
    } else if (res.contains("dos_table")) {
        const auto& tab = res.at("dos_table");
        require_keys(tab, "reservoirs.dos_table", {"energy", "density"}, {});
        TabulatedDos t{tab.at("energy").get<std::vector<double>>(),
                       tab.at("density").get<std::vector<double>>()};
        try {
            t.validate();
        } catch (const ConfigError& e) {
            fail("reservoirs.dos_table", e.what());
        }
        cfg.dos = t;
    }
    if (cfg.mode == EvolutionMode::Kind::Finite && !cfg.dos)
        fail("reservoirs", "finite mode requires a density of states (trap or dos_table)");

    const bool has_mu = res.contains("mu_l0") || res.contains("mu_r0");
    const bool has_n = res.contains("n_l0") || res.contains("n_r0");
    if (has_mu == has_n)
        fail("reservoirs", "give exactly one of the (mu_l0, mu_r0) or (n_l0, n_r0) pairs");
    try {
        if (has_mu) {
            cfg.mu_l0 = get_number(res, "reservoirs", "mu_l0");
            cfg.mu_r0 = get_number(res, "reservoirs", "mu_r0");
            cfg.n_l0 = occupation(cfg.lattice.eps_s, cfg.mu_l0, cfg.beta, cfg.statistics);
            cfg.n_r0 = occupation(cfg.lattice.eps_s, cfg.mu_r0, cfg.beta, cfg.statistics);
        } else {
            cfg.n_l0 = get_number(res, "reservoirs", "n_l0");
            cfg.n_r0 = get_number(res, "reservoirs", "n_r0");
            cfg.mu_l0 = mu_for_occupation(cfg.lattice.eps_s, cfg.n_l0, cfg.beta, cfg.statistics);
            cfg.mu_r0 = mu_for_occupation(cfg.lattice.eps_s, cfg.n_r0, cfg.beta, cfg.statistics);
        }
    } catch (const std::domain_error& e) {
        fail("reservoirs", e.what());
    }

    if (doc.contains("tpdm"))
        cfg.tpdm = doc.at("tpdm").get<bool>();
    if (doc.contains("t_max")) {
        cfg.t_max = get_number(doc, "", "t_max");
        if (!(*cfg.t_max > 0.0))
            fail("t_max", "must be positive");
    }
    if (doc.contains("N0")) {
        cfg.N0_override = get_number(doc, "", "N0");
        if (!(*cfg.N0_override > 0.0))
            fail("N0", "must be positive");
    }

    if (doc.contains("output")) {
        const auto& out = doc.at("output");
        require_keys(out, "output", {}, {"grid", "t_min", "points_per_decade", "points", "max_rows"});
        if (out.contains("grid")) {
            const std::string g = out.at("grid").get<std::string>();
            if (g == "log")
                cfg.output.grid = OutputSpec::Grid::Log;
            else if (g == "linear")
                cfg.output.grid = OutputSpec::Grid::Linear;
            else
                fail("output.grid", "expected \"log\" or \"linear\"");
        }
        if (out.contains("t_min"))
            cfg.output.t_min = get_number(out, "output", "t_min");
        if (out.contains("points_per_decade"))
            cfg.output.points_per_decade = out.at("points_per_decade").get<int>();
        if (out.contains("points"))
            cfg.output.points = out.at("points").get<int>();
        if (out.contains("max_rows"))
            cfg.output.max_rows = out.at("max_rows").get<int>();
    }

    if (doc.contains("integrator")) {
        const auto& integ = doc.at("integrator");
        require_keys(integ, "integrator", {}, {"rtol", "atol", "max_step"});
        if (integ.contains("rtol"))
            cfg.ode.rtol = get_number(integ, "integrator", "rtol");
        if (integ.contains("atol"))
            cfg.ode.atol = get_number(integ, "integrator", "atol");
        if (integ.contains("max_step"))
            cfg.ode.max_step = get_number(integ, "integrator", "max_step");
        if (!(cfg.ode.rtol > 0.0) || !(cfg.ode.atol > 0.0) || !(cfg.ode.max_step > 0.0))
            fail("integrator", "tolerances and max_step must be positive");
    }

    if (doc.contains("sweep")) {
        const auto& sw = doc.at("sweep");
        require_keys(sw, "sweep", {"sites", "gamma_bar"}, {"task"});
        SweepSpec spec;
        spec.sites = sw.at("sites").get<std::vector<int>>();
        spec.gamma_bar = sw.at("gamma_bar").get<std::vector<double>>();
        if (sw.contains("task")) {
            spec.task = sw.at("task").get<std::string>();
            if (spec.task != "spectrum" && spec.task != "relax")
                fail("sweep.task", "expected \"spectrum\" or \"relax\"");
        }
        if (spec.sites.empty() || spec.gamma_bar.empty())
            fail("sweep", "sites and gamma_bar must be non-empty");
        cfg.sweep = std::move(spec);
    }

    // derived reservoir quantities
    if (const auto mdl = cfg.model()) {
        try {
            mdl->validate();
            mdl->require_valid_mu(cfg.mu_l0);
            mdl->require_valid_mu(cfg.mu_r0);
        } catch (const std::exception& e) {
            fail("reservoirs", e.what());
        }
        cfg.e0 = mdl->minimum_energy();
        cfg.N_l0 = mdl->particle_number(cfg.mu_l0);
        cfg.N_r0 = mdl->particle_number(cfg.mu_r0);
        cfg.N0 = *cfg.N_l0 + *cfg.N_r0;
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot open config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json config_echo(const RunConfig& cfg) {
    json doc;
    doc["lattice"] = {{"sites", cfg.lattice.sites},
                      {"eps_s", cfg.lattice.eps_s},
                      {"gamma_l", cfg.lattice.gamma_l},
                      {"gamma_r", cfg.lattice.gamma_r}};
    doc["statistics"] = to_string(cfg.statistics);
    doc["mode"] = cfg.mode == EvolutionMode::Kind::Finite ? "finite" : "stationary";
    json res{{"beta", cfg.beta}, {"mu_l0", cfg.mu_l0}, {"mu_r0", cfg.mu_r0}};
    if (cfg.dos) {
        if (const auto* trap = std::get_if<HarmonicTrap3D>(&*cfg.dos))
            res["trap"] = {{"omega_x", trap->omega_x},
                           {"omega_y", trap->omega_y},
                           {"omega_z", trap->omega_z}};
        else if (const auto* tab = std::get_if<TabulatedDos>(&*cfg.dos))
            res["dos_table"] = {{"energy", tab->energy}, {"density", tab->density}};
    }
    doc["reservoirs"] = std::move(res);
    doc["tpdm"] = cfg.tpdm;
    if (cfg.t_max)
        doc["t_max"] = *cfg.t_max;
    if (cfg.N0_override)
        doc["N0"] = *cfg.N0_override;
    doc["output"] = {{"grid", cfg.output.grid == OutputSpec::Grid::Log ? "log" : "linear"},
                     {"t_min", cfg.output.t_min},
                     {"points_per_decade", cfg.output.points_per_decade},
                     {"points", cfg.output.points},
                     {"max_rows", cfg.output.max_rows}};
    doc["integrator"] = {{"rtol", cfg.ode.rtol}, {"atol", cfg.ode.atol}};
    if (std::isfinite(cfg.ode.max_step))
        doc["integrator"]["max_step"] = cfg.ode.max_step;
    if (cfg.sweep)
        doc["sweep"] = {{"task", cfg.sweep->task},
                        {"sites", cfg.sweep->sites},
                        {"gamma_bar", cfg.sweep->gamma_bar}};
    json derived{{"n_l0", cfg.n_l0}, {"n_r0", cfg.n_r0}};
    if (cfg.e0) {
        derived["e0"] = *cfg.e0;
        derived["N_l0"] = *cfg.N_l0;
        derived["N_r0"] = *cfg.N_r0;
        derived["N0"] = *cfg.N0;
    }
    doc["derived"] = std::move(derived);
    return doc;
}

}  // namespace finres
