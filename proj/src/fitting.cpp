#include "eitlab/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace eitlab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_eigen(const VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

MatrixXd numerical_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
    const std::vector<double>& params, std::size_t n_res, double rel_step) {
    const std::size_t n_par = params.size();
    MatrixXd jac(n_res, n_par);
    for (std::size_t j = 0; j < n_par; ++j) {
        const double step = rel_step * std::max(std::abs(params[j]), 1e-12);
        std::vector<double> plus = params, minus = params;
        plus[j] += step;
        minus[j] -= step;
        const std::vector<double> r_plus = residuals(plus);
        const std::vector<double> r_minus = residuals(minus);
        for (std::size_t i = 0; i < n_res; ++i)
            jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (r_plus[i] - r_minus[i]) / (2.0 * step);
    }
    return jac;
}

} // namespace

FitResult fit_least_squares(
    const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
    std::vector<double> initial, const LeastSquaresOptions& options) {
    if (initial.empty()) throw fit_error("fit_least_squares: no parameters");
    std::vector<double> params = std::move(initial);
    std::vector<double> res = residuals(params);
    const std::size_t n_res = res.size();
    if (n_res < params.size()) throw fit_error("fit_least_squares: under-determined problem");

    double rss = to_eigen(res).squaredNorm();
    double damping = options.initial_damping;
    FitResult result;
    MatrixXd jac;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        jac = numerical_jacobian(residuals, params, n_res, options.fd_relative_step);
        const MatrixXd jtj = jac.transpose() * jac;
        const VectorXd jtr = jac.transpose() * to_eigen(res);

        bool accepted = false;
        for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
            MatrixXd damped = jtj;
            for (Eigen::Index k = 0; k < damped.rows(); ++k)
                damped(k, k) += damping * std::max(jtj(k, k), 1e-300);
            const Eigen::LDLT<MatrixXd> solver(damped);
            if (solver.info() != Eigen::Success)
                throw fit_error("fit_least_squares: singular normal equations");
            const VectorXd delta = -solver.solve(jtr);
            if (!delta.allFinite())
                throw fit_error("fit_least_squares: singular normal equations");

            std::vector<double> trial = params;
            for (std::size_t k = 0; k < trial.size(); ++k)
                trial[k] += delta(static_cast<Eigen::Index>(k));
            const std::vector<double> trial_res = residuals(trial);
            const double trial_rss = to_eigen(trial_res).squaredNorm();
            if (trial_rss <= rss) {
                double max_rel_step = 0.0;
                for (std::size_t k = 0; k < trial.size(); ++k)
                    max_rel_step = std::max(
                        max_rel_step, std::abs(delta(static_cast<Eigen::Index>(k))) /
                                          std::max(std::abs(params[k]), 1e-12));
                params = std::move(trial);
                res = trial_res;
                rss = trial_rss;
                damping = std::max(damping / 3.0, 1e-14);
                accepted = true;
                if (max_rel_step < options.step_tolerance) {
                    result.converged = true;
                }
            } else {
                damping *= 10.0;
            }
        }
        if (result.converged) break;
        if (!accepted) {
            // no downhill step found at any damping: treat as stationary
            result.converged = true;
            break;
        }
    }

    result.parameters = params;
    result.residual_sum_squares = rss;
    if (!result.converged) {
        std::ostringstream os;
        os << "fit did not converge after " << result.iterations
           << " iterations, residual " << rss;
        throw fit_error(os.str());
    }

    // linearized covariance at the optimum
    jac = numerical_jacobian(residuals, params, n_res, options.fd_relative_step);
    const MatrixXd jtj = jac.transpose() * jac;
    const double dof = static_cast<double>(n_res) - static_cast<double>(params.size());
    const double variance = dof > 0.0 ? rss / dof : 0.0;
    const MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * variance;
    result.uncertainties.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double c = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        result.uncertainties[k] = c > 0.0 ? std::sqrt(c) : 0.0;
    }
    return result;
}

FitResult fit_lorentzian(const SpectrumTable& spectrum) {
    const auto& rows = spectrum.rows;
    if (rows.size() < 5) throw fit_error("fit_lorentzian: need at least 5 points");

    const auto min_it = std::min_element(rows.begin(), rows.end(),
                                         [](const SpectrumRow& a, const SpectrumRow& b) {
                                             return a.reflectivity < b.reflectivity;
                                         });
    const auto max_it = std::max_element(rows.begin(), rows.end(),
                                         [](const SpectrumRow& a, const SpectrumRow& b) {
                                             return a.reflectivity < b.reflectivity;
                                         });
    const double baseline0 = max_it->reflectivity;
    const double depth0 = baseline0 - min_it->reflectivity;
    const double center0 = min_it->delta;
    // crude width guess from the half-depth crossing nearest the minimum
    double hwhm0 = 0.0;
    for (const auto& r : rows) {
        if (r.delta > center0 && r.reflectivity > baseline0 - depth0 / 2.0) {
            hwhm0 = r.delta - center0;
            break;
        }
    }
    if (hwhm0 <= 0.0) hwhm0 = (rows.back().delta - rows.front().delta) / 4.0;

    auto residuals = [&rows](const std::vector<double>& p) {
        std::vector<double> res(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double x = (rows[i].delta - p[0]) / p[1];
            const double model = p[3] - p[2] / (1.0 + x * x);
            res[i] = rows[i].reflectivity - model;
        }
        return res;
    };
    FitResult fit = fit_least_squares(residuals, {center0, hwhm0, depth0, baseline0});
    fit.parameters[1] = std::abs(fit.parameters[1]);
    return fit;
}

FitResult fit_spectrum_global(const std::vector<SpectrumDataset>& datasets,
                              const FixedSpectrumParams& fixed, double g_collective_init) {
    if (datasets.empty()) throw fit_error("fit_spectrum_global: no datasets");
    fixed.cavity.validate();

    std::vector<std::size_t> omega_slot(datasets.size(), 0);
    std::vector<double> initial{g_collective_init};
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        if (datasets[d].table.rows.empty())
            throw fit_error("fit_spectrum_global: empty dataset");
        if (datasets[d].control_on) {
            omega_slot[d] = initial.size();
            initial.push_back(datasets[d].omega_c_init);
        }
    }

    auto residuals = [&](const std::vector<double>& p) {
        std::vector<double> res;
        SystemParams sp;
        sp.cavity = fixed.cavity;
        sp.ensemble.gamma = fixed.gamma;
        sp.ensemble.gamma0 = fixed.gamma0;
        const cplx a_in(1.0, 0.0);
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            sp.g_collective = std::abs(p[0]);
            sp.drive.omega_c = datasets[d].control_on ? std::abs(p[omega_slot[d]]) : 0.0;
            for (const auto& row : datasets[d].table.rows) {
                const cplx chi = evaluate_chi(sp, row.delta, fixed.variant);
                const auto rt = reflectivity_transmittivity(row.delta, chi, fixed.cavity, a_in);
                const double model =
                    datasets[d].fit_transmission ? rt.transmittivity : rt.reflectivity;
                const double data =
                    datasets[d].fit_transmission ? row.transmittivity : row.reflectivity;
                res.push_back(data - model);
            }
        }
        return res;
    };
    FitResult fit = fit_least_squares(residuals, initial);
    for (double& p : fit.parameters) p = std::abs(p);
    return fit;
}

FitWindow buildup_fit_window(const DynamicsTrace& trace) {
    if (trace.rows.empty()) throw fit_error("buildup_fit_window: empty trace");
    // The single-exponential description holds for the first few microseconds
    // of the buildup; the early cavity transient carries the fast part of the
    // transparency onset and is deliberately included in the fit.
    return {0.0, std::min(3e-6, trace.rows.back().t)};
}

FitResult fit_exponential_buildup(const DynamicsTrace& trace, const FitWindow& window) {
    std::vector<double> ts, rs;
    for (const auto& row : trace.rows) {
        if (row.t >= window.t_start && row.t <= window.t_end) {
            ts.push_back(row.t);
            rs.push_back(row.reflectivity);
        }
    }
    if (ts.size() < 5) throw fit_error("fit_exponential_buildup: fewer than 5 samples in window");

    // log-linear seed, then nonlinear refinement on R = b exp(-2 gamma t)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n_log = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (rs[i] <= 0.0) continue;
        const double y = std::log(rs[i]);
        sx += ts[i]; sy += y; sxx += ts[i] * ts[i]; sxy += ts[i] * y;
        ++n_log;
    }
    double b0 = rs.front(), rate0 = 0.0;
    if (n_log >= 2) {
        const double denom = n_log * sxx - sx * sx;
        if (denom != 0.0) {
            const double slope = (n_log * sxy - sx * sy) / denom;
            b0 = std::exp((sy - slope * sx) / n_log);
            rate0 = -slope / 2.0;
        }
    }
    if (rate0 <= 0.0) rate0 = 1.0 / (window.t_end - window.t_start + 1e-30);

    auto residuals = [&](const std::vector<double>& p) {
        std::vector<double> res(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i)
            res[i] = rs[i] - p[0] * std::exp(-2.0 * p[1] * ts[i]);
        return res;
    };
    return fit_least_squares(residuals, {b0, rate0});
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, double gamma,
                       double cooperativity) {
    if (points.size() < 2) throw fit_error("fit_scaling: need at least 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) {
        sx += p.omega_c_squared;
        sy += p.rate;
        sxx += p.omega_c_squared * p.omega_c_squared;
        sxy += p.omega_c_squared * p.rate;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw fit_error("fit_scaling: degenerate abscissa");
    ScalingFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.offset = (sy - fit.slope * sx) / n;
    if (fit.slope <= 0.0) throw fit_error("fit_scaling: non-positive slope");
    fit.alpha = 1.0 / (2.0 * fit.slope * gamma * (1.0 + 2.0 * cooperativity));
    return fit;
}

std::vector<NScanRow> n_scan_report(const std::vector<SystemParams>& crystals,
                                    double omega_c) {
    std::vector<NScanRow> report;
    report.reserve(crystals.size());
    const ShellDiscretization disc = discretize(64);
    for (SystemParams params : crystals) {
        params.drive.omega_c = omega_c;
        params.drive.delta = 0.0;
        params.validate();

        NScanRow row{};
        row.n_effective = params.ensemble.n_effective;
        row.g_injected = params.g_collective;
        row.hwhm = transparency_dip(params).hwhm;

        const DynamicsTrace trace = step_response(params, disc, 12e-6, 5e-9);
        const FitWindow window = buildup_fit_window(trace);
        row.buildup_rate = fit_exponential_buildup(trace, window).parameters[1];

        // synthetic dip-region spectrum, then a round-trip model fit
        const double span = mhz_to_rad(2.0);
        SpectrumTable synth = scan_spectrum(params, -span, span, khz_to_rad(2.0));
        SpectrumDataset dataset;
        dataset.table = std::move(synth);
        dataset.control_on = true;
        dataset.omega_c_init = omega_c * 1.1;
        FixedSpectrumParams fixed{params.cavity, params.ensemble.gamma,
                                  params.ensemble.gamma0, ChiVariant::continuous};
        const FitResult fit =
            fit_spectrum_global({dataset}, fixed, params.g_collective * 0.9);
        row.g_fitted = fit.parameters[0];
        report.push_back(row);
    }
    return report;
}

} // namespace eitlab
