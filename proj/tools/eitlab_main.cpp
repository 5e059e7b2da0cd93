#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eitlab/csv.hpp"
#include "eitlab/fitting.hpp"
#include "eitlab/quadrature.hpp"
#include "eitlab/scenario.hpp"

namespace {

int run_mode(const std::string& mode, const std::string& config_path,
             const std::string& out_dir, std::optional<std::uint64_t> seed, bool svg,
             const std::string& figure) {
    using namespace eitlab;
    try {
        ScenarioConfig config;
        if (!config_path.empty()) {
            config = load_config(config_path);
            if (config.mode != mode)
                throw config_error("mode: config says '" + config.mode +
                                   "' but subcommand is '" + mode + "'");
        } else if (mode == "reproduce" && !figure.empty()) {
            config.mode = "reproduce";
            config.figure = figure;
            config.params = apparatus_defaults();
        } else {
            throw config_error("--config is required");
        }
        if (seed) config.seed = *seed;
        if (!config.warnings.empty()) std::cerr << config.warnings;
        const RunManifest manifest = run_scenario(std::move(config), out_dir, svg);
        std::cout << "wrote " << manifest.outputs.size() << " files to " << out_dir
                  << " in " << manifest.duration_seconds << " s\n";
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity EIT spectra, buildup dynamics, and parameter fits"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool svg = false;
    std::string figure;

    const char* modes[] = {"spectrum", "dynamics", "scan-omega", "scan-n", "fit",
                           "reproduce"};
    for (const char* mode : modes) {
        CLI::App* sub = app.add_subcommand(mode);
        sub->add_option("--config", config_path, "scenario config JSON");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override for stochastic sampling");
        sub->add_flag("--svg", svg, "also render SVG plots");
        if (std::string(mode) == "reproduce")
            sub->add_option("--figure", figure, "figure id (fig3|fig5|fig6|fig8|fig9|fig10|fig11)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string mode = app.get_subcommands().front()->get_name();
    return run_mode(mode, config_path, out_dir, seed, svg, figure);
}
