#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eitlab/dynamics.hpp"
#include "eitlab/fitting.hpp"
#include "eitlab/params.hpp"

namespace eitlab {

inline constexpr const char* tool_version = "eitlab 1.0.0";
inline constexpr int schema_version = 1;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frequencies in config files are plain MHz (angular/2pi), times in
// microseconds; everything is converted to angular SI on load.
struct ScenarioConfig {
    std::string mode;            // spectrum | dynamics | scan-omega | scan-n | fit | reproduce
    std::uint64_t seed = 0;
    SystemParams params;
    std::string warnings;

    // spectrum grid (angular rad/s)
    double grid_span = mhz_to_rad(25.0);
    double grid_step = khz_to_rad(5.0);
    ChiVariant variant = ChiVariant::continuous;
    int shells = 64;
    double beta = 1.0;

    // dynamics trace
    double t_end = 10e-6;
    double sample_dt = 5e-9;
    std::optional<double> t_off;
    Propagator method = Propagator::eigendecomposition;
    double boxcar_window = 0.0;

    // scans
    std::vector<double> scan_omega;       // rad/s
    std::vector<double> scan_n;           // effective ion numbers
    double scan_g_single = 0.0;           // rad/s

    // fit mode
    std::string fit_kind;                 // lorentzian | exponential | spectrum
    std::filesystem::path fit_input;
    double fit_g_init = 0.0;              // rad/s
    double fit_omega_init = 0.0;          // rad/s

    // reproduce mode
    std::string figure;
};

struct CheckLine {
    std::string name;
    double value;
    double expected;
    double tolerance;
    bool pass;
};

struct RunManifest {
    std::string version;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::vector<CheckLine> checks;
    double duration_seconds = 0.0;
    std::string resolved_params_json;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const nlohmann::json& doc);

// Executes the configured mode, writes all outputs plus manifest.json under
// out_dir, and returns the manifest.
RunManifest run_scenario(ScenarioConfig config, const std::filesystem::path& out_dir,
                         bool svg = false);

// Figure-reproduction presets with pass/fail summary lines.
RunManifest reproduce(const std::string& figure_id, const std::filesystem::path& out_dir,
                      bool svg = false);

// Minimal SVG polyline rendering of CSV-style series; convenience only.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, const std::filesystem::path& path,
                    bool log_y = false);

} // namespace eitlab
