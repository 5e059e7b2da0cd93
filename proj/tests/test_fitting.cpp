#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eitlab/fitting.hpp"

using namespace eitlab;

namespace {

SystemParams defaults_with(double g_n_mhz, double omega_mhz) {
    SystemParams p = apparatus_defaults();
    p.g_collective = mhz_to_rad(g_n_mhz);
    p.drive.omega_c = mhz_to_rad(omega_mhz);
    return p;
}

} // namespace

TEST_CASE("Lorentzian fit recovers the bare cavity width") {
    const SystemParams p = defaults_with(0.0, 0.0);
    const SpectrumTable table =
        scan_spectrum(p, -mhz_to_rad(10.0), mhz_to_rad(10.0), khz_to_rad(20.0));
    const FitResult fit = fit_lorentzian(table);
    CHECK(fit.converged);
    CHECK(rad_to_mhz(fit.parameters[1]) == doctest::Approx(2.2).epsilon(1e-6));
    CHECK(rad_to_mhz(fit.parameters[0]) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("Lorentzian fit under seeded multiplicative noise") {
    const SystemParams p = defaults_with(0.0, 0.0);
    SpectrumTable table =
        scan_spectrum(p, -mhz_to_rad(10.0), mhz_to_rad(10.0), khz_to_rad(20.0));
    std::mt19937 rng(2024);
    std::normal_distribution<double> noise(1.0, 0.01);
    for (auto& row : table.rows) row.reflectivity *= noise(rng);
    const FitResult fit = fit_lorentzian(table);
    CHECK(rad_to_mhz(fit.parameters[1]) == doctest::Approx(2.2).epsilon(0.01));
    CHECK(fit.uncertainties[1] > 0.0);

    SpectrumTable tiny;
    tiny.rows.assign(3, {0.0, 1.0, 0.0, 0.0});
    CHECK_THROWS_AS(fit_lorentzian(tiny), fit_error);
}

TEST_CASE("global spectrum fit recovers a four-dataset family") {
    const double g_truth = mhz_to_rad(16.2);
    const std::vector<double> omegas{mhz_to_rad(1.18), mhz_to_rad(3.23), mhz_to_rad(5.91),
                                     mhz_to_rad(8.62)};
    SystemParams p = defaults_with(16.2, 0.0);
    std::vector<SpectrumDataset> datasets;
    for (double omega : omegas) {
        p.drive.omega_c = omega;
        SpectrumDataset d;
        d.table = scan_spectrum(p, -mhz_to_rad(1.5), mhz_to_rad(1.5), khz_to_rad(10.0));
        d.control_on = true;
        d.omega_c_init = omega * 1.2;
        datasets.push_back(std::move(d));
    }
    const FixedSpectrumParams fixed{p.cavity, p.ensemble.gamma, p.ensemble.gamma0,
                                    ChiVariant::continuous};
    const FitResult fit = fit_spectrum_global(datasets, fixed, mhz_to_rad(14.0));
    CHECK(fit.converged);
    CHECK(fit.parameters[0] == doctest::Approx(g_truth).epsilon(1e-4));
    for (std::size_t i = 0; i < omegas.size(); ++i)
        CHECK(fit.parameters[1 + i] == doctest::Approx(omegas[i]).epsilon(1e-4));
}

TEST_CASE("reflection and transmission fits of a two-level spectrum agree") {
    const SystemParams p = defaults_with(13.9, 0.0);
    const SpectrumTable table =
        scan_spectrum(p, -mhz_to_rad(25.0), mhz_to_rad(25.0), khz_to_rad(50.0));
    const FixedSpectrumParams fixed{p.cavity, p.ensemble.gamma, p.ensemble.gamma0,
                                    ChiVariant::continuous};

    SpectrumDataset refl;
    refl.table = table;
    refl.control_on = false;
    const FitResult fit_r = fit_spectrum_global({refl}, fixed, mhz_to_rad(12.0));
    CHECK(rad_to_mhz(fit_r.parameters[0]) == doctest::Approx(13.9).epsilon(1e-4));

    SpectrumDataset trans;
    trans.table = table;
    trans.fit_transmission = true;
    trans.control_on = false;
    const FitResult fit_t = fit_spectrum_global({trans}, fixed, mhz_to_rad(12.0));
    CHECK(rad_to_mhz(fit_t.parameters[0]) == doctest::Approx(13.9).epsilon(1e-4));
}

TEST_CASE("global fit from the truth converges immediately") {
    SystemParams p = defaults_with(16.2, 3.23);
    SpectrumDataset d;
    d.table = scan_spectrum(p, -mhz_to_rad(1.0), mhz_to_rad(1.0), khz_to_rad(20.0));
    d.control_on = true;
    d.omega_c_init = p.drive.omega_c;
    const FixedSpectrumParams fixed{p.cavity, p.ensemble.gamma, p.ensemble.gamma0,
                                    ChiVariant::continuous};
    const FitResult fit = fit_spectrum_global({d}, fixed, p.g_collective);
    CHECK(fit.converged);
    CHECK(fit.iterations <= 2);
}

TEST_CASE("exponential buildup fit on synthetic data") {
    DynamicsTrace trace;
    const double b = 0.83, rate = khz_to_rad(120.0);
    for (int i = 0; i <= 600; ++i) {
        const double t = i * 5e-9;
        trace.rows.push_back({t, b * std::exp(-2.0 * rate * t), 0.0});
    }
    const FitResult fit = fit_exponential_buildup(trace, {0.0, 3e-6});
    CHECK(fit.parameters[0] == doctest::Approx(b).epsilon(1e-10));
    CHECK(fit.parameters[1] == doctest::Approx(rate).epsilon(1e-10));

    CHECK_THROWS_AS(fit_exponential_buildup(trace, {0.0, 1e-8}), fit_error);
}

TEST_CASE("buildup window starts at switch-on and caps at 3 us") {
    const SystemParams p = defaults_with(13.6, 4.1);
    const ShellDiscretization disc = discretize(32);
    const DynamicsTrace trace = step_response(p, disc, 12e-6, 5e-9);
    const FitWindow window = buildup_fit_window(trace);
    CHECK(window.t_start == 0.0);
    CHECK(window.t_end == doctest::Approx(3e-6));
    // short traces clamp the window to their own length
    const DynamicsTrace brief = step_response(p, disc, 1e-6, 5e-9);
    CHECK(buildup_fit_window(brief).t_end == doctest::Approx(1e-6));
}

TEST_CASE("buildup rates rise with control intensity and match dip widths") {
    const ShellDiscretization disc = discretize(64);
    std::vector<ScalingPoint> pts;
    double prev_rate = 0.0;
    for (double omega : {3.0, 5.0, 7.0}) {
        const SystemParams p = defaults_with(17.3, omega);
        const DynamicsTrace trace = step_response(p, disc, 12e-6, 5e-9);
        const FitWindow window = buildup_fit_window(trace);
        const double rate = fit_exponential_buildup(trace, window).parameters[1];
        CHECK(rate > prev_rate);
        prev_rate = rate;
        const double hwhm = transparency_dip(p).hwhm;
        CHECK(rate / hwhm == doctest::Approx(1.0).epsilon(0.15));
        pts.push_back({mhz_to_rad(omega) * mhz_to_rad(omega), rate});
    }
    const SystemParams ref = defaults_with(17.3, 1.0);
    const ScalingFit scaling = fit_scaling(pts, ref.ensemble.gamma, ref.cooperativity());
    CHECK(scaling.alpha > 1.0);
    CHECK(scaling.alpha < 4.0);
}

TEST_CASE("scaling fit on exact collinear points") {
    const double gamma = mhz_to_rad(12.6);
    const double coop = 5.4;
    const double slope = 1.0 / (2.0 * 2.19 * gamma * (1.0 + 2.0 * coop));
    const double offset = khz_to_rad(1.0);
    std::vector<ScalingPoint> pts;
    for (double mhz : {1.0, 5.0, 9.0}) {
        const double x = mhz_to_rad(mhz) * mhz_to_rad(mhz);
        pts.push_back({x, offset + slope * x});
    }
    const ScalingFit fit = fit_scaling(pts, gamma, coop);
    CHECK(fit.slope == doctest::Approx(slope).epsilon(1e-12));
    CHECK(fit.offset == doctest::Approx(offset).epsilon(1e-9));
    CHECK(fit.alpha == doctest::Approx(2.19).epsilon(1e-9));

    CHECK_THROWS_AS(fit_scaling({pts[0], pts[0]}, gamma, coop), fit_error);
}

TEST_CASE("regression offset approaches gamma0 for weak control") {
    std::vector<ScalingPoint> pts;
    for (double mhz : {0.2, 0.3, 0.4, 0.5}) {
        const SystemParams p = defaults_with(16.2, mhz);
        pts.push_back({p.drive.omega_c * p.drive.omega_c, transparency_dip(p).hwhm});
    }
    const SystemParams ref = defaults_with(16.2, 1.0);
    const ScalingFit fit = fit_scaling(pts, ref.ensemble.gamma, ref.cooperativity());
    CHECK(rad_to_khz(fit.offset) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("accepted iterations never increase the objective") {
    // the optimizer only accepts downhill steps; spot-check that the final
    // residual does not exceed the initial one
    auto residuals = [](const std::vector<double>& p) {
        std::vector<double> r;
        for (double x = 0.0; x < 5.0; x += 0.25)
            r.push_back(std::exp(-0.7 * x) - p[0] * std::exp(-p[1] * x));
        return r;
    };
    double initial_rss = 0.0;
    for (double v : residuals({0.5, 2.0})) initial_rss += v * v;
    const FitResult fit = fit_least_squares(residuals, {0.5, 2.0});
    CHECK(fit.residual_sum_squares <= initial_rss);
    CHECK(fit.parameters[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.parameters[1] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("n-scan report on a reduced crystal pair") {
    std::vector<SystemParams> crystals;
    const double g_single = mhz_to_rad(16.6) / std::sqrt(890.0);
    for (double n : {400.0, 1000.0}) {
        SystemParams p = apparatus_defaults();
        p.ensemble.g_single = g_single;
        p.ensemble.n_effective = n;
        p.g_collective = collective_coupling(g_single, n);
        crystals.push_back(p);
    }
    const auto report = n_scan_report(crystals, mhz_to_rad(3.5));
    REQUIRE(report.size() == 2);
    CHECK(report[1].hwhm < report[0].hwhm);
    for (const auto& row : report) {
        CHECK(row.g_fitted == doctest::Approx(row.g_injected).epsilon(0.01));
        CHECK(row.buildup_rate / row.hwhm == doctest::Approx(1.0).epsilon(0.15));
    }
}
