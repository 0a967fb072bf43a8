#include "finres/output.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finres/errors.hpp"

namespace finres {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::set_comment(const std::string& key, const nlohmann::json& value) {
    comments_.emplace_back(key, value.dump());
}

void CsvTable::set_columns(std::vector<std::string> names) { columns_ = std::move(names); }

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw ConfigError("CsvTable: row width does not match the column set");
    rows_.push_back(values);
}

std::string CsvTable::to_string() const {
    std::ostringstream out;
    out << "# " << schema_ << "\n";
    for (const auto& [key, value] : comments_)
        out << "# " << key << ": " << value << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out << (i ? "," : "") << columns_[i];
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    return out.str();
}

void CsvTable::write(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot open output file " + file.string());
    out << to_string();
    if (!out)
        throw IoError("failed writing " + file.string());
}

std::vector<std::string> trajectory_columns(const RunConfig& cfg) {
    const int m = cfg.lattice.sites;
    const bool finite = cfg.mode == EvolutionMode::Kind::Finite;
    std::vector<std::string> cols;
    cols.push_back("t");
    if (finite) {
        cols.push_back("mu_L");
        cols.push_back("mu_R");
    }
    cols.push_back("n_L_res");
    cols.push_back("n_R_res");
    if (finite) {
        cols.push_back("N_L");
        cols.push_back("N_R");
    }
    cols.push_back("N_S");
    for (int l = 1; l <= m; ++l)
        cols.push_back("n_" + std::to_string(l));
    for (int l = 1; l < m; ++l)
        cols.push_back("j_" + std::to_string(l) + "_" + std::to_string(l + 1));
    cols.push_back("I");
    for (int j = 1; j <= m; ++j)
        for (int k = j + 2; k <= m; ++k)
            cols.push_back("sigma_abs_" + std::to_string(j) + "_" + std::to_string(k));
    if (cfg.tpdm) {
        for (int l = 1; l <= m; ++l)
            cols.push_back("var_n_" + std::to_string(l));
        for (int l = 1; l < m; ++l)
            cols.push_back("var_j_" + std::to_string(l) + "_" + std::to_string(l + 1));
    }
    if (finite)
        cols.push_back("conservation_residual");
    return cols;
}

std::vector<double> trajectory_row(const TrajectoryPoint& pt, const RunConfig& cfg,
                                   const Trajectory& traj) {
    const int m = cfg.lattice.sites;
    const bool finite = cfg.mode == EvolutionMode::Kind::Finite;
    const auto& obs = pt.observables;
    std::vector<double> row;
    row.push_back(pt.state.t);
    if (finite) {
        row.push_back(pt.state.mu_l);
        row.push_back(pt.state.mu_r);
    }
    row.push_back(obs.n_res_left);
    row.push_back(obs.n_res_right);
    if (finite) {
        row.push_back(traj.model->particle_number(pt.state.mu_l));
        row.push_back(traj.model->particle_number(pt.state.mu_r));
    }
    row.push_back(obs.lattice_particle_number);
    for (int l = 0; l < m; ++l)
        row.push_back(obs.site_population[l]);
    for (int l = 0; l + 1 < m; ++l)
        row.push_back(obs.bond_current[l]);
    row.push_back(obs.macroscopic_current);
    for (int j = 0; j < m; ++j)
        for (int k = j + 2; k < m; ++k)
            row.push_back(obs.coherence_abs(j, k));
    if (cfg.tpdm) {
        for (int l = 0; l < m; ++l)
            row.push_back(obs.population_variance ? (*obs.population_variance)[l] : 0.0);
        for (int l = 0; l + 1 < m; ++l)
            row.push_back(obs.current_variance ? (*obs.current_variance)[l] : 0.0);
    }
    if (finite)
        row.push_back(pt.conservation_residual);
    return row;
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj,
                          const RunConfig& cfg) {
    CsvTable table("finres trajectory v1");
    table.set_comment("config", config_echo(cfg));
    table.set_columns(trajectory_columns(cfg));
    for (const auto& pt : traj.points)
        table.add_row(trajectory_row(pt, cfg, traj));
    table.write(file);
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_file) {
    std::filesystem::path p = csv_file;
    p.replace_extension(".meta.json");
    return p;
}

void write_metadata(const std::filesystem::path& file, const nlohmann::json& meta) {
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot open output file " + file.string());
    out << meta.dump(2) << "\n";
    if (!out)
        throw IoError("failed writing " + file.string());
}

}  // namespace finres
