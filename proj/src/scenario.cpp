#include "eitlab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eitlab/csv.hpp"
#include "eitlab/quadrature.hpp"

namespace eitlab {

using nlohmann::json;

namespace {

double get_number(const json& obj, const std::string& field, double fallback,
                  const std::string& context) {
    if (!obj.contains(field)) return fallback;
    if (!obj[field].is_number())
        throw config_error(context + "." + field + ": expected a number");
    return obj[field].get<double>();
}

ChiVariant parse_variant(const std::string& name) {
    if (name == "continuous") return ChiVariant::continuous;
    if (name == "canonical") return ChiVariant::canonical;
    if (name == "discrete") return ChiVariant::discrete;
    if (name == "quadrature") return ChiVariant::quadrature;
    throw config_error("variant: unknown value '" + name + "'");
}

SystemParams parse_params(const json& doc, std::string* warnings) {
    SystemParams p = apparatus_defaults();
    if (!doc.contains("params")) return p;
    const json& pj = doc["params"];
    if (!pj.is_object()) throw config_error("params: expected an object");

    std::optional<CavityGeometry> geom;
    if (pj.contains("geometry")) {
        const json& gj = pj["geometry"];
        CavityGeometry g;
        g.cavity_length = get_number(gj, "length_mm", 11.7, "params.geometry") * 1e-3;
        g.waist_probe = get_number(gj, "waist_probe_um", 37.0, "params.geometry") * 1e-6;
        g.waist_control = get_number(gj, "waist_control_um", 37.0, "params.geometry") * 1e-6;
        g.transmission_high_ppm = get_number(gj, "t_high_ppm", 1500.0, "params.geometry");
        g.transmission_low_ppm = get_number(gj, "t_low_ppm", 4.0, "params.geometry");
        g.roundtrip_loss_ppm = get_number(gj, "loss_ppm", 650.0, "params.geometry");
        geom = g;
    }
    std::optional<CavityRates> direct;
    if (pj.contains("kappa_mhz")) {
        CavityRates r;
        r.kappa = mhz_to_rad(get_number(pj, "kappa_mhz", 2.2, "params"));
        r.kappa_high = pj.contains("kappa_h_mhz")
                           ? mhz_to_rad(get_number(pj, "kappa_h_mhz", 0.0, "params"))
                           : get_number(pj, "kappa_h_fraction", 0.696, "params") * r.kappa;
        r.kappa_low = mhz_to_rad(get_number(
            pj, "kappa_l_mhz", rad_to_mhz((4.0 / 2154.0) * r.kappa), "params"));
        direct = r;
    }
    if (direct || geom) p.cavity = resolve_cavity_rates(direct, geom, warnings);

    p.ensemble.gamma = mhz_to_rad(get_number(pj, "gamma_mhz", 12.6, "params"));
    p.ensemble.gamma0 = khz_to_rad(get_number(pj, "gamma0_khz", 1.0, "params"));

    if (pj.contains("g_n_mhz")) {
        p.g_collective = mhz_to_rad(get_number(pj, "g_n_mhz", 0.0, "params"));
    } else if (pj.contains("g_single_mhz")) {
        p.ensemble.g_single = mhz_to_rad(get_number(pj, "g_single_mhz", 0.0, "params"));
        if (pj.contains("n_effective")) {
            p.ensemble.n_effective = get_number(pj, "n_effective", 0.0, "params");
        } else if (pj.contains("density_per_cm3")) {
            p.ensemble.density = get_number(pj, "density_per_cm3", 0.0, "params") * 1e6;
            p.ensemble.half_length =
                get_number(pj, "half_length_um", 0.0, "params") * 1e-6;
            const double waist = geom ? geom->waist_probe : 37e-6;
            p.ensemble.n_effective =
                effective_ion_number(p.ensemble.density, waist, p.ensemble.half_length);
        } else {
            throw config_error("params: g_single_mhz needs n_effective or density_per_cm3");
        }
        p.g_collective = collective_coupling(p.ensemble.g_single, p.ensemble.n_effective);
    }
    if (doc.contains("drive")) {
        const json& dj = doc["drive"];
        p.drive.omega_c = mhz_to_rad(get_number(dj, "omega_c_mhz", 0.0, "drive"));
        p.drive.delta = mhz_to_rad(get_number(dj, "delta_mhz", 0.0, "drive"));
        p.drive.input_flux = get_number(dj, "input_flux", 1.0, "drive");
    }
    return p;
}

json params_to_json(const SystemParams& p) {
    json j;
    j["kappa_mhz"] = rad_to_mhz(p.cavity.kappa);
    j["kappa_h_mhz"] = rad_to_mhz(p.cavity.kappa_high);
    j["kappa_l_mhz"] = rad_to_mhz(p.cavity.kappa_low);
    j["gamma_mhz"] = rad_to_mhz(p.ensemble.gamma);
    j["gamma0_khz"] = rad_to_khz(p.ensemble.gamma0);
    j["g_n_mhz"] = rad_to_mhz(p.g_collective);
    j["omega_c_mhz"] = rad_to_mhz(p.drive.omega_c);
    j["delta_mhz"] = rad_to_mhz(p.drive.delta);
    j["input_flux"] = p.drive.input_flux;
    j["cooperativity"] = p.cooperativity();
    return j;
}

struct OmegaScanRow {
    double omega_c;       // rad/s
    double hwhm;          // rad/s
    double buildup_rate;  // rad/s
};

// Shared machinery of scan-omega, fig8, and fig9: per control power, the
// steady-state dip width and the short-time exponential buildup rate.
std::vector<OmegaScanRow> omega_scan(SystemParams params,
                                     const std::vector<double>& omegas, int shells,
                                     double t_end, double sample_dt) {
    const ShellDiscretization disc = discretize(shells);
    std::vector<OmegaScanRow> rows;
    rows.reserve(omegas.size());
    for (double omega : omegas) {
        params.drive.omega_c = omega;
        params.drive.delta = 0.0;
        OmegaScanRow row{omega, 0.0, 0.0};
        row.hwhm = transparency_dip(params).hwhm;
        const DynamicsTrace trace = step_response(params, disc, t_end, sample_dt);
        const FitWindow window = buildup_fit_window(trace);
        row.buildup_rate = fit_exponential_buildup(trace, window).parameters[1];
        rows.push_back(row);
    }
    return rows;
}

class Runner {
  public:
    Runner(ScenarioConfig config, std::filesystem::path out_dir, bool svg)
        : config_(std::move(config)), out_dir_(std::move(out_dir)), svg_(svg) {
        std::filesystem::create_directories(out_dir_);
        manifest_.version = tool_version;
        manifest_.seed = config_.seed;
    }

    RunManifest run() {
        const auto start = std::chrono::steady_clock::now();
        if (config_.mode == "spectrum") run_spectrum();
        else if (config_.mode == "dynamics") run_dynamics();
        else if (config_.mode == "scan-omega") run_scan_omega();
        else if (config_.mode == "scan-n") run_scan_n();
        else if (config_.mode == "fit") run_fit();
        else if (config_.mode == "reproduce") run_reproduce();
        else throw config_error("mode: unknown value '" + config_.mode + "'");
        manifest_.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest_.resolved_params_json = params_to_json(config_.params).dump();
        write_manifest();
        return manifest_;
    }

  private:
    ScenarioConfig config_;
    std::filesystem::path out_dir_;
    bool svg_;
    RunManifest manifest_;

    std::filesystem::path record(const std::string& name) {
        manifest_.outputs.push_back(name);
        return out_dir_ / name;
    }

    void check(const std::string& name, double value, double expected, double tolerance) {
        const bool pass = std::abs(value - expected) <= tolerance;
        manifest_.checks.push_back({name, value, expected, tolerance, pass});
        std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << value
                  << " (expected " << expected << " +- " << tolerance << ")\n";
    }

    SpectrumTable scan(const SystemParams& params) const {
        return scan_spectrum(params, -config_.grid_span, config_.grid_span,
                             config_.grid_step, config_.variant);
    }

    void plot_spectra(const std::vector<std::pair<std::string, const SpectrumTable*>>& named,
                      const std::string& stem) {
        if (!svg_) return;
        std::vector<PlotSeries> series;
        for (const auto& [label, table] : named) {
            PlotSeries s;
            s.label = label;
            for (const auto& row : table->rows) {
                s.x.push_back(rad_to_mhz(row.delta));
                s.y.push_back(row.reflectivity);
            }
            series.push_back(std::move(s));
        }
        write_svg_plot(series, "detuning [MHz]", "reflectivity", record(stem + ".svg"));
    }

    void plot_traces(const std::vector<std::pair<std::string, const DynamicsTrace*>>& named,
                     const std::string& stem) {
        if (!svg_) return;
        std::vector<PlotSeries> series;
        for (const auto& [label, trace] : named) {
            PlotSeries s;
            s.label = label;
            for (const auto& row : trace->rows) {
                s.x.push_back(s_to_us(row.t));
                s.y.push_back(row.reflectivity);
            }
            series.push_back(std::move(s));
        }
        write_svg_plot(series, "t [us]", "reflectivity", record(stem + ".svg"));
    }

    void run_spectrum() {
        const SpectrumTable table = scan(config_.params);
        write_spectrum_csv(table, record("spectrum.csv"));
        plot_spectra({{"R", &table}}, "spectrum");
    }

    TraceOptions trace_options() const {
        TraceOptions opt;
        opt.method = config_.method;
        opt.boxcar_window = config_.boxcar_window;
        return opt;
    }

    void run_dynamics() {
        const ShellDiscretization disc = discretize(config_.shells, config_.beta);
        const DynamicsTrace trace =
            config_.t_off ? switchoff_response(config_.params, disc, *config_.t_off,
                                               config_.t_end, config_.sample_dt,
                                               trace_options())
                          : step_response(config_.params, disc, config_.t_end,
                                          config_.sample_dt, trace_options());
        write_trace_csv(trace, record("trace.csv"));
        plot_traces({{"R", &trace}}, "trace");
    }

    void run_scan_omega() {
        if (config_.scan_omega.empty())
            throw config_error("scan.omega_c_mhz: required for scan-omega mode");
        const auto rows = omega_scan(config_.params, config_.scan_omega, config_.shells,
                                     config_.t_end, config_.sample_dt);
        std::vector<std::vector<double>> out;
        for (const auto& r : rows)
            out.push_back({rad_to_mhz(r.omega_c), rad_to_khz(r.hwhm),
                           rad_to_khz(r.buildup_rate)});
        write_table_csv({"omega_c_mhz", "hwhm_khz", "buildup_rate_khz"}, out,
                        record("scan_omega.csv"));

        std::vector<ScalingPoint> hwhm_pts, rate_pts;
        for (const auto& r : rows) {
            hwhm_pts.push_back({r.omega_c * r.omega_c, r.hwhm});
            rate_pts.push_back({r.omega_c * r.omega_c, r.buildup_rate});
        }
        const double coop = config_.params.cooperativity();
        const ScalingFit hwhm_fit =
            fit_scaling(hwhm_pts, config_.params.ensemble.gamma, coop);
        const ScalingFit rate_fit =
            fit_scaling(rate_pts, config_.params.ensemble.gamma, coop);
        std::cout << "hwhm scaling: alpha = " << hwhm_fit.alpha
                  << ", offset/2pi = " << rad_to_khz(hwhm_fit.offset) << " kHz\n"
                  << "rate scaling: alpha = " << rate_fit.alpha
                  << ", offset/2pi = " << rad_to_khz(rate_fit.offset) << " kHz\n";
    }

    void run_scan_n() {
        if (config_.scan_n.empty())
            throw config_error("scan.n_effective: required for scan-n mode");
        if (config_.scan_g_single <= 0.0)
            throw config_error("scan.g_single_mhz: required for scan-n mode");
        std::vector<SystemParams> crystals;
        for (double n : config_.scan_n) {
            SystemParams p = config_.params;
            p.ensemble.g_single = config_.scan_g_single;
            p.ensemble.n_effective = n;
            p.g_collective = collective_coupling(config_.scan_g_single, n);
            crystals.push_back(p);
        }
        const auto report = n_scan_report(crystals, config_.params.drive.omega_c);
        std::vector<std::vector<double>> out;
        for (const auto& r : report)
            out.push_back({r.n_effective, rad_to_khz(r.hwhm), rad_to_khz(r.buildup_rate),
                           rad_to_mhz(r.g_injected), rad_to_mhz(r.g_fitted)});
        write_table_csv(
            {"n_effective", "hwhm_khz", "buildup_rate_khz", "g_n_injected_mhz",
             "g_n_fitted_mhz"},
            out, record("scan_n.csv"));
    }

    void run_fit() {
        std::ostringstream report;
        std::vector<std::vector<double>> csv_rows;
        std::vector<std::string> csv_header;
        if (config_.fit_kind == "lorentzian") {
            const SpectrumTable table = read_spectrum_csv(config_.fit_input);
            const FitResult fit = fit_lorentzian(table);
            report << "kind=lorentzian\n"
                   << "center_mhz=" << rad_to_mhz(fit.parameters[0]) << "\n"
                   << "hwhm_mhz=" << rad_to_mhz(fit.parameters[1]) << "\n"
                   << "depth=" << fit.parameters[2] << "\n"
                   << "baseline=" << fit.parameters[3] << "\n"
                   << "hwhm_sigma_mhz=" << rad_to_mhz(fit.uncertainties[1]) << "\n";
            csv_header = {"center_mhz", "hwhm_mhz", "depth", "baseline", "rss"};
            csv_rows.push_back({rad_to_mhz(fit.parameters[0]), rad_to_mhz(fit.parameters[1]),
                                fit.parameters[2], fit.parameters[3],
                                fit.residual_sum_squares});
            finish_fit(report, fit);
        } else if (config_.fit_kind == "exponential") {
            const DynamicsTrace trace = read_trace_csv(config_.fit_input);
            const FitWindow window = buildup_fit_window(trace);
            const FitResult fit = fit_exponential_buildup(trace, window);
            report << "kind=exponential\n"
                   << "b=" << fit.parameters[0] << "\n"
                   << "gamma_eit_khz=" << rad_to_khz(fit.parameters[1]) << "\n"
                   << "gamma_eit_sigma_khz=" << rad_to_khz(fit.uncertainties[1]) << "\n"
                   << "window_start_us=" << s_to_us(window.t_start) << "\n"
                   << "window_end_us=" << s_to_us(window.t_end) << "\n";
            csv_header = {"b", "gamma_eit_khz", "rss"};
            csv_rows.push_back(
                {fit.parameters[0], rad_to_khz(fit.parameters[1]), fit.residual_sum_squares});
            finish_fit(report, fit);
        } else if (config_.fit_kind == "spectrum") {
            SpectrumDataset dataset;
            dataset.table = read_spectrum_csv(config_.fit_input);
            dataset.control_on = config_.params.drive.omega_c > 0.0 ||
                                 config_.fit_omega_init > 0.0;
            dataset.omega_c_init = config_.fit_omega_init > 0.0 ? config_.fit_omega_init
                                                                : config_.params.drive.omega_c;
            const FixedSpectrumParams fixed{config_.params.cavity,
                                            config_.params.ensemble.gamma,
                                            config_.params.ensemble.gamma0, config_.variant};
            const double g_init = config_.fit_g_init > 0.0 ? config_.fit_g_init
                                                           : config_.params.g_collective;
            const FitResult fit = fit_spectrum_global({dataset}, fixed, g_init);
            report << "kind=spectrum\n"
                   << "g_n_mhz=" << rad_to_mhz(fit.parameters[0]) << "\n"
                   << "g_n_sigma_mhz=" << rad_to_mhz(fit.uncertainties[0]) << "\n";
            csv_header = {"g_n_mhz", "rss"};
            csv_rows.push_back({rad_to_mhz(fit.parameters[0]), fit.residual_sum_squares});
            if (dataset.control_on) {
                report << "omega_c_mhz=" << rad_to_mhz(fit.parameters[1]) << "\n"
                       << "omega_c_sigma_mhz=" << rad_to_mhz(fit.uncertainties[1]) << "\n";
            }
            finish_fit(report, fit);
        } else {
            throw config_error("fit.kind: unknown value '" + config_.fit_kind + "'");
        }
        std::ofstream txt(record("fit_report.txt"));
        txt << report.str();
        write_table_csv(csv_header, csv_rows, record("fit_report.csv"));
    }

    static void finish_fit(std::ostringstream& report, const FitResult& fit) {
        report << "rss=" << fit.residual_sum_squares << "\n"
               << "iterations=" << fit.iterations << "\n"
               << "converged=" << (fit.converged ? 1 : 0) << "\n";
    }

    // ---- figure presets ----

    void run_reproduce() {
        if (config_.figure == "fig3") reproduce_fig3();
        else if (config_.figure == "fig5") reproduce_fig5();
        else if (config_.figure == "fig6") reproduce_fig6();
        else if (config_.figure == "fig8") reproduce_fig8();
        else if (config_.figure == "fig9") reproduce_fig9();
        else if (config_.figure == "fig10") reproduce_fig10();
        else if (config_.figure == "fig11") reproduce_fig11();
        else throw config_error("figure: unknown id '" + config_.figure + "'");
    }

    static SystemParams fig3_params() {
        SystemParams p = apparatus_defaults();
        p.g_collective = mhz_to_rad(13.6);
        p.drive.omega_c = mhz_to_rad(4.1);
        return p;
    }

    static SystemParams fig5_params() {
        SystemParams p = apparatus_defaults();
        p.g_collective = mhz_to_rad(16.2);
        return p;
    }

    static std::vector<double> fig5_omegas() {
        return {mhz_to_rad(1.18), mhz_to_rad(3.23), mhz_to_rad(5.91), mhz_to_rad(8.62)};
    }

    void reproduce_fig3() {
        SystemParams p = fig3_params();
        SystemParams bare = p;
        bare.g_collective = 0.0;
        bare.drive.omega_c = 0.0;
        SystemParams no_control = p;
        no_control.drive.omega_c = 0.0;

        const SpectrumTable s_bare = scan(bare);
        const SpectrumTable s_off = scan(no_control);
        const SpectrumTable s_on = scan(p);
        write_spectrum_csv(s_bare, record("fig3_bare.csv"));
        write_spectrum_csv(s_off, record("fig3_no_control.csv"));
        write_spectrum_csv(s_on, record("fig3_control.csv"));
        const SpectrumTable zoom = scan_spectrum(p, -mhz_to_rad(1.0), mhz_to_rad(1.0),
                                                 khz_to_rad(0.2), config_.variant);
        write_spectrum_csv(zoom, record("fig3_dip_zoom.csv"));
        plot_spectra({{"bare", &s_bare}, {"no control", &s_off}, {"control", &s_on}},
                     "fig3");

        check("fig3 transparency without control", atomic_transparency(no_control), 0.02,
              0.01);
        check("fig3 transparency with control", atomic_transparency(p), 0.84, 0.06);
        check("fig3 dip hwhm [kHz]", rad_to_khz(transparency_dip(p).hwhm), 47.5,
              0.2 * 47.5);
    }

    void reproduce_fig5() {
        SystemParams p = fig5_params();
        std::vector<SpectrumDataset> datasets;
        std::vector<SpectrumTable> tables;
        const auto omegas = fig5_omegas();
        tables.reserve(omegas.size());
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            p.drive.omega_c = omegas[i];
            tables.push_back(scan_spectrum(p, -mhz_to_rad(1.5), mhz_to_rad(1.5),
                                           khz_to_rad(1.0), config_.variant));
            const std::string name = "fig5_omega" + std::to_string(i) + ".csv";
            write_spectrum_csv(tables.back(), record(name));
            SpectrumDataset d;
            d.table = tables.back();
            d.control_on = true;
            d.omega_c_init = omegas[i] * 1.15;
            datasets.push_back(std::move(d));
        }
        const FixedSpectrumParams fixed{p.cavity, p.ensemble.gamma, p.ensemble.gamma0,
                                        ChiVariant::continuous};
        const FitResult fit = fit_spectrum_global(datasets, fixed, mhz_to_rad(15.0));
        check("fig5 global fit g_N [MHz]", rad_to_mhz(fit.parameters[0]), 16.2,
              0.01 * 16.2);
        for (std::size_t i = 0; i < omegas.size(); ++i)
            check("fig5 fitted omega_c " + std::to_string(i) + " [MHz]",
                  rad_to_mhz(fit.parameters[1 + i]), rad_to_mhz(omegas[i]),
                  0.01 * rad_to_mhz(omegas[i]));
    }

    void reproduce_fig6() {
        SystemParams p = fig5_params();
        const ShellDiscretization disc = discretize(config_.shells);
        const double t_off = 10e-6;
        const double t_end = 16e-6;
        std::vector<DynamicsTrace> traces;
        std::vector<std::pair<std::string, const DynamicsTrace*>> plots;
        const auto omegas = fig5_omegas();
        traces.reserve(omegas.size());
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            p.drive.omega_c = omegas[i];
            traces.push_back(
                switchoff_response(p, disc, t_off, t_end, config_.sample_dt));
            write_trace_csv(traces.back(), record("fig6_omega" + std::to_string(i) + ".csv"));
            plots.emplace_back("omega" + std::to_string(i), &traces.back());
        }
        plot_traces(plots, "fig6");

        SystemParams no_control = p;
        no_control.drive.omega_c = 0.0;
        const double r_absorptive = shell_steady_reflectivity(no_control, disc);
        for (std::size_t i = 0; i < traces.size(); ++i)
            check("fig6 switch-off return " + std::to_string(i),
                  traces[i].rows.back().reflectivity, r_absorptive, 1e-3);
    }

    void reproduce_fig8() {
        SystemParams p = apparatus_defaults();
        // cooperativity pinned to 5.4 with apparatus kappa and gamma
        p.g_collective = std::sqrt(5.4 * 2.0 * p.cavity.kappa * p.ensemble.gamma);
        std::vector<double> omegas;
        for (double mhz : {1.0, 3.0, 5.0, 7.0, 9.0}) omegas.push_back(mhz_to_rad(mhz));

        const ShellDiscretization disc = discretize(config_.shells);
        std::vector<ScalingPoint> rate_pts;
        std::vector<std::vector<double>> scaling_rows;
        std::vector<DynamicsTrace> traces;
        std::vector<std::pair<std::string, const DynamicsTrace*>> plots;
        const auto rows = omega_scan(p, omegas, config_.shells, 12e-6, config_.sample_dt);
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            p.drive.omega_c = omegas[i];
            p.drive.delta = 0.0;
            traces.push_back(step_response(p, disc, 12e-6, config_.sample_dt));
            write_trace_csv(traces.back(), record("fig8_omega" + std::to_string(i) + ".csv"));
            plots.emplace_back("omega" + std::to_string(i), &traces.back());
            rate_pts.push_back({omegas[i] * omegas[i], rows[i].buildup_rate});
            scaling_rows.push_back({rad_to_mhz(omegas[i]),
                                    rad_to_khz(rows[i].buildup_rate),
                                    rad_to_khz(rows[i].hwhm)});
        }
        plot_traces(plots, "fig8");
        write_table_csv({"omega_c_mhz", "buildup_rate_khz", "hwhm_khz"}, scaling_rows,
                        record("fig8_scaling.csv"));

        const ScalingFit fit = fit_scaling(rate_pts, p.ensemble.gamma, 5.4);
        check("fig8 alpha", fit.alpha, 2.19, 0.1);
    }

    void reproduce_fig9() {
        SystemParams p = fig5_params();
        std::vector<double> omegas;
        for (double mhz : {3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0})
            omegas.push_back(mhz_to_rad(mhz));
        const auto rows = omega_scan(p, omegas, config_.shells, 12e-6, config_.sample_dt);
        std::vector<std::vector<double>> out;
        std::vector<ScalingPoint> hwhm_pts, rate_pts;
        for (const auto& r : rows) {
            out.push_back({rad_to_mhz(r.omega_c), rad_to_khz(r.hwhm),
                           rad_to_khz(r.buildup_rate)});
            hwhm_pts.push_back({r.omega_c * r.omega_c, r.hwhm});
            rate_pts.push_back({r.omega_c * r.omega_c, r.buildup_rate});
        }
        write_table_csv({"omega_c_mhz", "hwhm_khz", "buildup_rate_khz"}, out,
                        record("fig9.csv"));

        const double coop = p.cooperativity();
        const ScalingFit hwhm_fit = fit_scaling(hwhm_pts, p.ensemble.gamma, coop);
        const ScalingFit rate_fit = fit_scaling(rate_pts, p.ensemble.gamma, coop);
        // slope quoted in the 1/(2pi MHz) convention
        const double slope_units = hwhm_fit.slope * mhz_to_rad(1.0);
        const double rate_slope_units = rate_fit.slope * mhz_to_rad(1.0);
        check("fig9 hwhm slope [1e-3 per 2pi MHz]", slope_units * 1e3, 1.7, 0.25);
        check("fig9 hwhm offset [kHz]", rad_to_khz(hwhm_fit.offset), 1.0, 0.5);
        check("fig9 rate slope [1e-3 per 2pi MHz]", rate_slope_units * 1e3, 1.8, 0.3);
        for (const auto& r : rows)
            check("fig9 rate vs hwhm at omega " +
                      std::to_string(static_cast<int>(std::round(rad_to_mhz(r.omega_c)))),
                  r.buildup_rate / r.hwhm, 1.0, 0.15);
    }

    static std::vector<SystemParams> n_scan_crystals(const std::vector<double>& ns) {
        // single-ion coupling consistent with g_N ~ 2pi 16.6 MHz at N ~ 890
        const double g_single = mhz_to_rad(16.6) / std::sqrt(890.0);
        std::vector<SystemParams> crystals;
        for (double n : ns) {
            SystemParams p = apparatus_defaults();
            p.ensemble.g_single = g_single;
            p.ensemble.n_effective = n;
            p.g_collective = collective_coupling(g_single, n);
            crystals.push_back(p);
        }
        return crystals;
    }

    void reproduce_fig10() {
        const std::vector<double> ns{393, 590, 737, 938, 1112};
        auto crystals = n_scan_crystals(ns);
        std::vector<double> hwhms;
        std::vector<SpectrumTable> tables;
        std::vector<std::pair<std::string, const SpectrumTable*>> plots;
        for (std::size_t i = 0; i < crystals.size(); ++i) {
            crystals[i].drive.omega_c = mhz_to_rad(3.5);
            tables.push_back(scan_spectrum(crystals[i], -mhz_to_rad(1.0), mhz_to_rad(1.0),
                                           khz_to_rad(1.0), config_.variant));
            write_spectrum_csv(tables.back(), record("fig10_n" + std::to_string(i) + ".csv"));
            plots.emplace_back("N=" + std::to_string(static_cast<int>(ns[i])),
                               &tables.back());
            hwhms.push_back(transparency_dip(crystals[i]).hwhm);
        }
        plot_spectra(plots, "fig10");
        bool decreasing = true;
        for (std::size_t i = 1; i < hwhms.size(); ++i)
            decreasing = decreasing && hwhms[i] < hwhms[i - 1];
        check("fig10 hwhm strictly decreasing in N", decreasing ? 1.0 : 0.0, 1.0, 0.0);
    }

    void reproduce_fig11() {
        const std::vector<double> ns{393, 590, 737, 938, 1112};
        const auto report = n_scan_report(n_scan_crystals(ns), mhz_to_rad(3.5));
        std::vector<std::vector<double>> out;
        for (const auto& r : report)
            out.push_back({r.n_effective, rad_to_khz(r.hwhm), rad_to_khz(r.buildup_rate),
                           rad_to_mhz(r.g_injected), rad_to_mhz(r.g_fitted)});
        write_table_csv(
            {"n_effective", "hwhm_khz", "buildup_rate_khz", "g_n_injected_mhz",
             "g_n_fitted_mhz"},
            out, record("fig11.csv"));
        for (const auto& r : report) {
            check("fig11 g_N round trip at N=" +
                      std::to_string(static_cast<int>(r.n_effective)),
                  r.g_fitted / r.g_injected, 1.0, 0.01);
            check("fig11 rate vs hwhm at N=" +
                      std::to_string(static_cast<int>(r.n_effective)),
                  r.buildup_rate / r.hwhm, 1.0, 0.15);
        }
    }

    void write_manifest() {
        json j;
        j["version"] = manifest_.version;
        j["schema_version"] = schema_version;
        j["mode"] = config_.mode;
        j["seed"] = manifest_.seed;
        j["outputs"] = manifest_.outputs;
        j["duration_seconds"] = manifest_.duration_seconds;
        j["params"] = params_to_json(config_.params);
        if (!config_.warnings.empty()) j["warnings"] = config_.warnings;
        json checks = json::array();
        for (const auto& c : manifest_.checks)
            checks.push_back({{"name", c.name},
                              {"value", c.value},
                              {"expected", c.expected},
                              {"tolerance", c.tolerance},
                              {"pass", c.pass}});
        j["checks"] = checks;
        std::ofstream out(out_dir_ / "manifest.json");
        out << j.dump(2) << "\n";
        manifest_.outputs.push_back("manifest.json");
    }
};

} // namespace

ScenarioConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw config_error("config root: expected an object");
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
        throw config_error("schema_version: required integer field");
    if (doc["schema_version"].get<int>() != schema_version)
        throw config_error("schema_version: unsupported version");
    if (!doc.contains("mode") || !doc["mode"].is_string())
        throw config_error("mode: required string field");

    ScenarioConfig cfg;
    cfg.mode = doc["mode"].get<std::string>();
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer())
            throw config_error("seed: expected an integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    cfg.params = parse_params(doc, &cfg.warnings);

    if (doc.contains("grid")) {
        const json& gj = doc["grid"];
        cfg.grid_span = mhz_to_rad(get_number(gj, "span_mhz", 25.0, "grid"));
        cfg.grid_step = khz_to_rad(get_number(gj, "step_khz", 5.0, "grid"));
        if (cfg.grid_span <= 0.0) throw config_error("grid.span_mhz: must be positive");
        if (cfg.grid_step <= 0.0) throw config_error("grid.step_khz: must be positive");
    }
    if (doc.contains("variant")) {
        if (!doc["variant"].is_string()) throw config_error("variant: expected a string");
        cfg.variant = parse_variant(doc["variant"].get<std::string>());
    }
    cfg.shells = static_cast<int>(get_number(doc, "shells", 64, "config"));
    if (cfg.shells < 1) throw config_error("shells: must be at least 1");
    cfg.beta = get_number(doc, "beta", 1.0, "config");
    if (cfg.beta <= 0.0) throw config_error("beta: must be positive");

    if (doc.contains("trace")) {
        const json& tj = doc["trace"];
        cfg.t_end = us_to_s(get_number(tj, "t_end_us", 10.0, "trace"));
        cfg.sample_dt = us_to_s(get_number(tj, "sample_dt_us", 0.005, "trace"));
        if (cfg.t_end <= 0.0) throw config_error("trace.t_end_us: must be positive");
        if (cfg.sample_dt <= 0.0) throw config_error("trace.sample_dt_us: must be positive");
        if (tj.contains("t_off_us")) {
            cfg.t_off = us_to_s(get_number(tj, "t_off_us", 0.0, "trace"));
            if (*cfg.t_off < 0.0 || *cfg.t_off > cfg.t_end)
                throw config_error("trace.t_off_us: must lie within [0, t_end_us]");
        }
        if (tj.contains("method")) {
            const std::string m = tj["method"].get<std::string>();
            if (m == "eigen") cfg.method = Propagator::eigendecomposition;
            else if (m == "rk") cfg.method = Propagator::adaptive_rk;
            else throw config_error("trace.method: expected 'eigen' or 'rk'");
        }
        cfg.boxcar_window = us_to_s(get_number(tj, "boxcar_us", 0.0, "trace"));
    }
    if (doc.contains("scan")) {
        const json& sj = doc["scan"];
        if (sj.contains("omega_c_mhz")) {
            if (!sj["omega_c_mhz"].is_array())
                throw config_error("scan.omega_c_mhz: expected an array");
            for (const auto& v : sj["omega_c_mhz"])
                cfg.scan_omega.push_back(mhz_to_rad(v.get<double>()));
        }
        if (sj.contains("n_effective")) {
            if (!sj["n_effective"].is_array())
                throw config_error("scan.n_effective: expected an array");
            for (const auto& v : sj["n_effective"]) cfg.scan_n.push_back(v.get<double>());
        }
        cfg.scan_g_single = mhz_to_rad(get_number(sj, "g_single_mhz", 0.0, "scan"));
    }
    if (doc.contains("fit")) {
        const json& fj = doc["fit"];
        if (!fj.contains("kind") || !fj["kind"].is_string())
            throw config_error("fit.kind: required string field");
        cfg.fit_kind = fj["kind"].get<std::string>();
        if (!fj.contains("input") || !fj["input"].is_string())
            throw config_error("fit.input: required string field");
        cfg.fit_input = fj["input"].get<std::string>();
        cfg.fit_g_init = mhz_to_rad(get_number(fj, "g_init_mhz", 0.0, "fit"));
        cfg.fit_omega_init = mhz_to_rad(get_number(fj, "omega_init_mhz", 0.0, "fit"));
    }
    if (doc.contains("figure")) {
        if (!doc["figure"].is_string()) throw config_error("figure: expected a string");
        cfg.figure = doc["figure"].get<std::string>();
    }
    if (cfg.mode == "fit" && cfg.fit_kind.empty())
        throw config_error("fit: block required for fit mode");
    if (cfg.mode == "reproduce" && cfg.figure.empty())
        throw config_error("figure: required for reproduce mode");
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

RunManifest run_scenario(ScenarioConfig config, const std::filesystem::path& out_dir,
                         bool svg) {
    Runner runner(std::move(config), out_dir, svg);
    return runner.run();
}

RunManifest reproduce(const std::string& figure_id, const std::filesystem::path& out_dir,
                      bool svg) {
    ScenarioConfig cfg;
    cfg.mode = "reproduce";
    cfg.figure = figure_id;
    cfg.params = apparatus_defaults();
    return run_scenario(std::move(cfg), out_dir, svg);
}

void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, const std::filesystem::path& path,
                    bool log_y) {
    const int width = 720, height = 480, margin = 60;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.y) {
            const double y = log_y ? std::log10(std::max(v, 1e-12)) : v;
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= y_min) y_max = y_min + 1.0;

    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                            "#8c564b"};
    auto map_x = [&](double v) {
        return margin + (v - x_min) / (x_max - x_min) * (width - 2 * margin);
    };
    auto map_y = [&](double v) {
        const double y = log_y ? std::log10(std::max(v, 1e-12)) : v;
        return height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin);
    };
    out << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
        << width - margin << "' y2='" << height - margin << "' stroke='black'/>\n"
        << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n"
        << "<text x='" << width / 2 << "' y='" << height - 15 << "' text-anchor='middle'>"
        << x_label << "</text>\n"
        << "<text x='15' y='" << height / 2 << "' transform='rotate(-90 15 "
        << height / 2 << ")' text-anchor='middle'>" << y_label << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        out << "<polyline fill='none' stroke='" << colors[si % 6] << "' points='";
        for (std::size_t i = 0; i < series[si].x.size(); ++i)
            out << map_x(series[si].x[i]) << ',' << map_y(series[si].y[i]) << ' ';
        out << "'/>\n<text x='" << width - margin + 5 << "' y='"
            << margin + 18 * static_cast<int>(si) << "' fill='" << colors[si % 6]
            << "' font-size='11'>" << series[si].label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace eitlab
