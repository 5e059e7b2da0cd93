#pragma once

#include <functional>
#include <vector>

#include "eitlab/dynamics.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitResult {
    std::vector<double> parameters;
    std::vector<double> uncertainties;   // 1 sigma, linearized covariance
    double residual_sum_squares = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct LeastSquaresOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-8;        // relative parameter step
    double fd_relative_step = 1e-6;      // central-difference Jacobian
    double initial_damping = 1e-3;
};

// Damped least squares (Levenberg-Marquardt) with a numerical Jacobian.
// Residuals are data - model; parameter order is the caller's.
FitResult fit_least_squares(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                            std::vector<double> initial,
                            const LeastSquaresOptions& options = {});

// Lorentzian dip fit; parameters (center, hwhm, depth, baseline).
FitResult fit_lorentzian(const SpectrumTable& spectrum);

// One dataset of a joint spectrum fit.
struct SpectrumDataset {
    SpectrumTable table;
    bool fit_transmission = false;   // reflectivity column otherwise
    bool control_on = true;          // adds a free per-dataset Omega_c
    double omega_c_init = 0.0;       // rad/s, initial guess when control_on
};

struct FixedSpectrumParams {
    CavityRates cavity;
    double gamma = 0.0;
    double gamma0 = 0.0;
    ChiVariant variant = ChiVariant::continuous;
};

// Joint fit of several spectra sharing g_N, with one Omega_c per control-on
// dataset. Parameters: (g_N, Omega_c[0], Omega_c[1], ...).
FitResult fit_spectrum_global(const std::vector<SpectrumDataset>& datasets,
                              const FixedSpectrumParams& fixed, double g_collective_init);

struct FitWindow {
    double t_start;
    double t_end;
};

// Window for the buildup-rate fit: from the switch-on of the fields through
// the first 3 us of the interaction (clamped to the trace length).
FitWindow buildup_fit_window(const DynamicsTrace& trace);

// Fit R(t) = b exp(-2 gamma_EIT t) over the window.
// Parameters: (b, gamma_EIT).
FitResult fit_exponential_buildup(const DynamicsTrace& trace, const FitWindow& window);

struct ScalingFit {
    double slope = 0.0;      // 1/(rad/s), against Omega_c^2
    double offset = 0.0;     // rad/s
    double alpha = 0.0;      // control-inhomogeneity scaling factor
};

struct ScalingPoint {
    double omega_c_squared;  // (rad/s)^2
    double rate;             // rad/s
};

// Ordinary least squares line through (Omega_c^2, gamma_EIT);
// alpha = 1 / (2 slope gamma (1 + 2C)).
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, double gamma,
                       double cooperativity);

struct NScanRow {
    double n_effective;
    double g_injected;       // rad/s
    double hwhm;             // rad/s, steady-state dip
    double buildup_rate;     // rad/s, exponential fit
    double g_fitted;         // rad/s, spectrum round trip
};

// Per-crystal dip widths, buildup rates, and round-trip fitted couplings.
// Crystals must share cavity and atomic rates.
std::vector<NScanRow> n_scan_report(const std::vector<SystemParams>& crystals,
                                    double omega_c);

} // namespace eitlab
