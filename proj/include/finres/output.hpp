#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finres/config.hpp"
#include "finres/dynamics.hpp"

namespace finres {

/// 17-significant-digit decimal form; round trips any double.
std::string format_double(double v);

/// A '#'-headed CSV table: header block (schema line, config echo, free-form
/// comment lines), one column-name line, then rows serialized with
/// format_double. Deterministic byte-for-byte for identical inputs.
class CsvTable {
  public:
    explicit CsvTable(std::string schema) : schema_(std::move(schema)) {}

    void set_comment(const std::string& key, const nlohmann::json& value);
    void set_columns(std::vector<std::string> names);
    void add_row(const std::vector<double>& values);
    void write(const std::filesystem::path& file) const;
    std::string to_string() const;

  private:
    std::string schema_;
    std::vector<std::pair<std::string, std::string>> comments_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Column names of a trajectory table for a given run (mode and M dependent).
std::vector<std::string> trajectory_columns(const RunConfig& cfg);

/// One trajectory point flattened in the column order of trajectory_columns.
std::vector<double> trajectory_row(const TrajectoryPoint& pt, const RunConfig& cfg,
                                   const Trajectory& traj);

/// Writes the trajectory CSV and returns the body also written to `file`.
void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj,
                          const RunConfig& cfg);

/// Sidecar path: out.csv -> out.meta.json.
std::filesystem::path metadata_path(const std::filesystem::path& csv_file);

/// Writes the metadata sidecar (config echo, derived constants, analysis
/// results) as sorted-key JSON.
void write_metadata(const std::filesystem::path& file, const nlohmann::json& meta);

}  // namespace finres
