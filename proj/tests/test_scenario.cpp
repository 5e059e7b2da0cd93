#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eitlab/csv.hpp"
#include "eitlab/scenario.hpp"

using namespace eitlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("eitlab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json minimal_spectrum_config() {
    return json{{"schema_version", 1},
                {"mode", "spectrum"},
                {"params", {{"g_n_mhz", 13.6}}},
                {"drive", {{"omega_c_mhz", 4.1}}},
                {"grid", {{"span_mhz", 1.0}, {"step_khz", 50.0}}}};
}

} // namespace

TEST_CASE("config parsing accepts a minimal document") {
    const ScenarioConfig cfg = parse_config(minimal_spectrum_config());
    CHECK(cfg.mode == "spectrum");
    CHECK(rad_to_mhz(cfg.params.g_collective) == doctest::Approx(13.6));
    CHECK(rad_to_mhz(cfg.params.drive.omega_c) == doctest::Approx(4.1));
    CHECK(rad_to_mhz(cfg.grid_span) == doctest::Approx(1.0));
    CHECK(rad_to_khz(cfg.grid_step) == doctest::Approx(50.0));
    // untouched fields keep the documented defaults
    CHECK(cfg.shells == 64);
    CHECK(cfg.variant == ChiVariant::continuous);
}

TEST_CASE("config parsing rejects malformed documents") {
    CHECK_THROWS_AS(parse_config(json::array()), config_error);
    CHECK_THROWS_AS(parse_config(json{{"mode", "spectrum"}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 99}, {"mode", "spectrum"}}),
                    config_error);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 1}}), config_error);

    json bad = minimal_spectrum_config();
    bad["grid"]["step_khz"] = 0.0;
    CHECK_THROWS_AS(parse_config(bad), config_error);
    bad = minimal_spectrum_config();
    bad["grid"]["span_mhz"] = -2.0;
    CHECK_THROWS_AS(parse_config(bad), config_error);
    bad = minimal_spectrum_config();
    bad["variant"] = "hexagonal";
    CHECK_THROWS_AS(parse_config(bad), config_error);
    bad = minimal_spectrum_config();
    bad["shells"] = 0;
    CHECK_THROWS_AS(parse_config(bad), config_error);
    bad = minimal_spectrum_config();
    bad["seed"] = "abc";
    CHECK_THROWS_AS(parse_config(bad), config_error);
    bad = minimal_spectrum_config();
    bad["params"]["gamma_mhz"] = "fast";
    CHECK_THROWS_AS(parse_config(bad), config_error);

    json fit{{"schema_version", 1}, {"mode", "fit"}};
    CHECK_THROWS_AS(parse_config(fit), config_error);
    json rep{{"schema_version", 1}, {"mode", "reproduce"}};
    CHECK_THROWS_AS(parse_config(rep), config_error);

    json trace = minimal_spectrum_config();
    trace["trace"] = {{"t_end_us", 2.0}, {"t_off_us", 5.0}};
    CHECK_THROWS_AS(parse_config(trace), config_error);

    json single{{"schema_version", 1},
                {"mode", "spectrum"},
                {"params", {{"g_single_mhz", 0.5}}}};
    CHECK_THROWS_AS(parse_config(single), config_error);
}

TEST_CASE("collective coupling from single-ion data") {
    json doc{{"schema_version", 1},
             {"mode", "spectrum"},
             {"params", {{"g_single_mhz", 0.5564}, {"n_effective", 890.0}}}};
    const ScenarioConfig cfg = parse_config(doc);
    CHECK(rad_to_mhz(cfg.params.g_collective) == doctest::Approx(16.6).epsilon(1e-3));
}

TEST_CASE("spectrum runs are deterministic byte for byte") {
    const fs::path dir_a = fresh_dir("det_a");
    const fs::path dir_b = fresh_dir("det_b");
    run_scenario(parse_config(minimal_spectrum_config()), dir_a);
    run_scenario(parse_config(minimal_spectrum_config()), dir_b);
    CHECK(slurp(dir_a / "spectrum.csv") == slurp(dir_b / "spectrum.csv"));
    CHECK(fs::exists(dir_a / "manifest.json"));
    const json manifest = json::parse(slurp(dir_a / "manifest.json"));
    CHECK(manifest["schema_version"] == schema_version);
    CHECK(manifest["mode"] == "spectrum");
    CHECK(manifest["outputs"][0] == "spectrum.csv");
}

TEST_CASE("spectrum csv round trip") {
    const fs::path dir = fresh_dir("roundtrip");
    const ScenarioConfig cfg = parse_config(minimal_spectrum_config());
    run_scenario(cfg, dir);
    const SpectrumTable table = read_spectrum_csv(dir / "spectrum.csv");
    const SpectrumTable direct = scan_spectrum(cfg.params, -cfg.grid_span, cfg.grid_span,
                                               cfg.grid_step, cfg.variant);
    REQUIRE(table.rows.size() == direct.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(table.rows[i].delta ==
              doctest::Approx(direct.rows[i].delta).epsilon(1e-10));
        CHECK(table.rows[i].reflectivity ==
              doctest::Approx(direct.rows[i].reflectivity).epsilon(1e-10));
    }
    CHECK_THROWS_AS(read_spectrum_csv(dir / "missing.csv"), io_error);
}

TEST_CASE("trace csv round trip through the dynamics mode") {
    const fs::path dir = fresh_dir("trace");
    json doc = minimal_spectrum_config();
    doc["mode"] = "dynamics";
    doc["shells"] = 8;
    doc["trace"] = {{"t_end_us", 1.0}, {"sample_dt_us", 0.02}};
    run_scenario(parse_config(doc), dir);
    const DynamicsTrace trace = read_trace_csv(dir / "trace.csv");
    REQUIRE(trace.rows.size() == 51);
    CHECK(trace.rows.front().t == doctest::Approx(0.0));
    CHECK(trace.rows.back().t == doctest::Approx(1e-6).epsilon(1e-10));
    CHECK(trace.rows.front().reflectivity == doctest::Approx(1.0));
}

TEST_CASE("fit mode consumes a generated spectrum") {
    const fs::path dir = fresh_dir("fitmode");
    json gen{{"schema_version", 1},
             {"mode", "spectrum"},
             {"params", {{"g_n_mhz", 0.0}}},
             {"grid", {{"span_mhz", 10.0}, {"step_khz", 50.0}}}};
    run_scenario(parse_config(gen), dir);

    const fs::path fit_dir = fresh_dir("fitmode_out");
    json fit{{"schema_version", 1},
             {"mode", "fit"},
             {"fit", {{"kind", "lorentzian"}, {"input", (dir / "spectrum.csv").string()}}}};
    run_scenario(parse_config(fit), fit_dir);
    const std::string report = slurp(fit_dir / "fit_report.txt");
    CHECK(report.find("kind=lorentzian") != std::string::npos);
    CHECK(report.find("converged=1") != std::string::npos);
    // hwhm_mhz=2.2... somewhere in the report
    CHECK(report.find("hwhm_mhz=2.2") != std::string::npos);
}

TEST_CASE("scan-omega mode writes its summary table") {
    const fs::path dir = fresh_dir("scanomega");
    json doc = minimal_spectrum_config();
    doc["mode"] = "scan-omega";
    doc["shells"] = 16;
    doc["trace"] = {{"t_end_us", 12.0}, {"sample_dt_us", 0.01}};
    doc["scan"] = {{"omega_c_mhz", {3.0, 6.0}}};
    run_scenario(parse_config(doc), dir);
    const std::string csv = slurp(dir / "scan_omega.csv");
    CHECK(csv.rfind("omega_c_mhz,hwhm_khz,buildup_rate_khz\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    json empty = doc;
    empty["scan"].erase("omega_c_mhz");
    CHECK_THROWS_AS(run_scenario(parse_config(empty), fresh_dir("scanomega_bad")),
                    config_error);
}

TEST_CASE("svg rendering emits a plausible document") {
    const fs::path dir = fresh_dir("svg");
    run_scenario(parse_config(minimal_spectrum_config()), dir, true);
    const std::string svg = slurp(dir / "spectrum.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("reflectivity") != std::string::npos);
}

#ifdef EITLAB_BIN

#include <sys/wait.h>

namespace {

int run_cli(const std::string& args) {
    const int status = std::system((std::string(EITLAB_BIN) + " " + args).c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("cli exit codes") {
    const fs::path dir = fresh_dir("cli");
    const fs::path good = dir / "good.json";
    {
        std::ofstream out(good);
        out << minimal_spectrum_config().dump();
    }
    CHECK(run_cli("spectrum --config " + good.string() + " --out " +
                  (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "spectrum.csv"));

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{\"schema_version\": 1}";
    }
    CHECK(run_cli("spectrum --config " + bad.string()) == 2);

    // mode mismatch between subcommand and config
    CHECK(run_cli("dynamics --config " + good.string()) == 2);

    // unknown figure id
    CHECK(run_cli("reproduce --figure nosuch --out " + (dir / "rep").string()) == 2);

    // missing config file
    CHECK(run_cli("spectrum --config " + (dir / "absent.json").string()) == 2);
}

#endif
