#pragma once

#include "flmgof/harness/study.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace flmgof::harness {

inline constexpr const char* kPowerCsvHeader = "scenario,d,n,M,reps,reject_pct,q0_pct,sec_per_rep";

std::string power_csv(const std::vector<PowerRow>& rows);

/// Config, seed, library and compiler versions and the row table.
nlohmann::json run_manifest(const StudyConfig& cfg, const std::vector<PowerRow>& rows, const std::string& command);

/// Static SVG line chart, one polyline per series.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

nlohmann::json report_json(const TestReport& report);
std::string report_summary(const TestReport& report);

/// Throws kIoError when the file cannot be written.
void write_text(const std::string& path, const std::string& content);

/// power.csv, manifest.json and, for the grid-size study, the three SVG
/// figures under cfg.out_dir. Throws kInvalidArgument for empty rows.
void emit_power_outputs(const StudyConfig& cfg, const std::vector<PowerRow>& rows, const std::string& command);
void emit_gridsize_outputs(const StudyConfig& cfg, const GridsizeResult& result);

const char* library_version();

} // namespace flmgof::harness
