#include "eitlab/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "eitlab/quadrature.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

std::vector<double> ShellDiscretization::control_scales() const {
    std::vector<double> scales(intensities.size());
    for (std::size_t k = 0; k < intensities.size(); ++k)
        scales[k] = std::pow(intensities[k], beta / 2.0);
    return scales;
}

ShellDiscretization discretize(int shell_count, double beta) {
    if (shell_count < 1) throw invalid_parameter("discretize: need at least one shell");
    if (beta <= 0.0) throw invalid_parameter("discretize: beta must be positive");
    ShellDiscretization disc;
    disc.shell_count = shell_count;
    disc.beta = beta;
    disc.intensities.resize(shell_count);
    for (int k = 0; k < shell_count; ++k)
        disc.intensities[k] = (shell_count - k - 0.5) / shell_count;
    return disc;
}

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// State layout: x = (a, sigma_1..sigma_M, s_1..s_M), dimension 2M+1.
struct LinearSystem {
    MatrixXcd matrix;
    VectorXcd drive;
    int shells;
};

LinearSystem build_system(const SystemParams& params, const ShellDiscretization& disc,
                          double omega_c) {
    const int m = disc.shell_count;
    const int dim = 2 * m + 1;
    const double delta = params.drive.delta;
    const double g_shell = params.g_collective / std::sqrt(static_cast<double>(m));
    const double omega_bar = omega_c / std::sqrt(2.0);
    const std::vector<double> scales = disc.control_scales();

    LinearSystem sys;
    sys.shells = m;
    sys.matrix = MatrixXcd::Zero(dim, dim);
    sys.drive = VectorXcd::Zero(dim);
    sys.matrix(0, 0) = cplx(-params.cavity.kappa, delta);
    for (int k = 0; k < m; ++k) {
        const int si = 1 + k;
        const int gi = 1 + m + k;
        const cplx coupling(0.0, g_shell);
        const cplx control(0.0, omega_bar * scales[k]);
        sys.matrix(0, si) = coupling;
        sys.matrix(si, 0) = coupling;
        sys.matrix(si, si) = cplx(-params.ensemble.gamma, delta);
        sys.matrix(si, gi) = control;
        sys.matrix(gi, si) = control;
        sys.matrix(gi, gi) = cplx(-params.ensemble.gamma0, delta);
    }
    const double a_in = std::sqrt(params.drive.input_flux);
    sys.drive(0) = std::sqrt(2.0 * params.cavity.kappa_high) * a_in;
    return sys;
}

// phi(z, t) = (e^{zt} - 1)/z, stable for z -> 0.
cplx phi(const cplx& z, double t) {
    const cplx zt = z * t;
    if (std::abs(zt) < 1e-8) return t * (1.0 + zt / 2.0 + zt * zt / 6.0);
    return (std::exp(zt) - 1.0) / z;
}

// Exact LTI propagator through eigendecomposition of the system matrix.
class EigenPropagator {
  public:
    EigenPropagator(const LinearSystem& sys, const VectorXcd& x0) {
        Eigen::ComplexEigenSolver<MatrixXcd> solver(sys.matrix);
        if (solver.info() != Eigen::Success)
            throw numerical_error("eigendecomposition of the system matrix failed");
        eigenvalues_ = solver.eigenvalues();
        vectors_ = solver.eigenvectors();
        const auto lu = vectors_.partialPivLu();
        y0_ = lu.solve(x0);
        drive_modes_ = lu.solve(sys.drive);
    }

    VectorXcd state_at(double t) const {
        VectorXcd y(eigenvalues_.size());
        for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
            const cplx lam = eigenvalues_(i);
            y(i) = std::exp(lam * t) * y0_(i) + phi(lam, t) * drive_modes_(i);
        }
        return vectors_ * y;
    }

  private:
    VectorXcd eigenvalues_;
    MatrixXcd vectors_;
    VectorXcd y0_;
    VectorXcd drive_modes_;
};

// Dormand-Prince 5(4) with proportional step control; cross-check path only.
VectorXcd integrate_rk(const LinearSystem& sys, VectorXcd x, double t_span,
                       double rel_tol,
                       const std::function<void(double, const VectorXcd&)>& observer,
                       const std::vector<double>& sample_times) {
    auto deriv = [&](const VectorXcd& v) -> VectorXcd { return sys.matrix * v + sys.drive; };

    double t = 0.0;
    double h = t_span / 1000.0;
    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] <= 1e-18) {
        observer(sample_times[next_sample], x);
        ++next_sample;
    }

    long steps = 0;
    while (t < t_span) {
        if (++steps > 50'000'000) {
            std::ostringstream os;
            os << "adaptive integrator stalled at t = " << t << " s with step " << h;
            throw numerical_error(os.str());
        }
        // clip the step to land exactly on sample times and on the span end
        double h_step = std::min(h, t_span - t);
        if (next_sample < sample_times.size() && sample_times[next_sample] > t)
            h_step = std::min(h_step, sample_times[next_sample] - t);
        const VectorXcd k1 = deriv(x);
        const VectorXcd k2 = deriv(x + h_step * (0.2 * k1));
        const VectorXcd k3 = deriv(x + h_step * (3.0 / 40 * k1 + 9.0 / 40 * k2));
        const VectorXcd k4 =
            deriv(x + h_step * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
        const VectorXcd k5 = deriv(x + h_step * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                                                 64448.0 / 6561 * k3 - 212.0 / 729 * k4));
        const VectorXcd k6 = deriv(x + h_step * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 +
                                                 46732.0 / 5247 * k3 + 49.0 / 176 * k4 -
                                                 5103.0 / 18656 * k5));
        const VectorXcd x5 =
            x + h_step * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                          2187.0 / 6784 * k5 + 11.0 / 84 * k6);
        const VectorXcd k7 = deriv(x5);
        const VectorXcd x4 = x + h_step * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 +
                                           393.0 / 640 * k4 - 92097.0 / 339200 * k5 +
                                           187.0 / 2100 * k6 + 1.0 / 40 * k7);
        const double scale = std::max(x.norm(), x5.norm()) + 1e-30;
        const double err = (x5 - x4).norm() / (rel_tol * scale);
        if (err <= 1.0) {
            t += h_step;
            x = x5;
            while (next_sample < sample_times.size() &&
                   sample_times[next_sample] <= t + 1e-18) {
                observer(sample_times[next_sample], x);
                ++next_sample;
            }
        }
        const double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h = h_step * std::clamp(factor, 0.2, 5.0);
    }
    return x;
}

double reflectivity_of(const SystemParams& params, const cplx& a) {
    const double a_in = std::sqrt(params.drive.input_flux);
    if (a_in == 0.0) throw invalid_parameter("dynamics: input flux must be positive");
    return std::norm(std::sqrt(2.0 * params.cavity.kappa_high) * a / a_in - 1.0);
}

DynamicsTrace run_piecewise(const SystemParams& params, const ShellDiscretization& disc,
                            double t_switch, double t_end, double sample_dt,
                            const TraceOptions& options, bool has_switch) {
    params.validate();
    if (sample_dt <= 0.0) throw invalid_parameter("dynamics: sample_dt must be positive");
    if (t_end < 0.0) throw invalid_parameter("dynamics: t_end must be non-negative");
    if (has_switch && t_switch > t_end)
        throw invalid_parameter("dynamics: t_off must not exceed t_end");

    const int dim = 2 * disc.shell_count + 1;
    const std::size_t count = static_cast<std::size_t>(std::floor(t_end / sample_dt + 0.5)) + 1;
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i) times[i] = static_cast<double>(i) * sample_dt;

    DynamicsTrace trace;
    trace.rows.reserve(count);
    auto record = [&](double t, const VectorXcd& x) {
        trace.rows.push_back({t, reflectivity_of(params, x(0)), std::norm(x(0))});
        if (options.keep_snapshots) {
            ShellState snap;
            snap.field = x(0);
            snap.dipoles.assign(x.data() + 1, x.data() + 1 + disc.shell_count);
            snap.coherences.assign(x.data() + 1 + disc.shell_count, x.data() + dim);
            trace.snapshots.push_back(std::move(snap));
        }
    };

    struct Phase {
        double t_begin, t_span;
        LinearSystem sys;
    };
    std::vector<Phase> phases;
    if (has_switch) {
        phases.push_back({0.0, t_switch, build_system(params, disc, params.drive.omega_c)});
        phases.push_back({t_switch, t_end - t_switch, build_system(params, disc, 0.0)});
    } else {
        phases.push_back({0.0, t_end, build_system(params, disc, params.drive.omega_c)});
    }

    VectorXcd x = VectorXcd::Zero(dim);
    std::size_t next_sample = 0;
    for (const Phase& phase : phases) {
        std::vector<double> local_times;
        while (next_sample < count && times[next_sample] <= phase.t_begin + phase.t_span + 1e-18) {
            local_times.push_back(times[next_sample] - phase.t_begin);
            ++next_sample;
        }
        if (options.method == Propagator::eigendecomposition) {
            EigenPropagator prop(phase.sys, x);
            for (double tl : local_times) record(phase.t_begin + tl, prop.state_at(tl));
            x = prop.state_at(phase.t_span);
        } else {
            x = integrate_rk(phase.sys, x, phase.t_span, options.rk_rel_tol,
                             [&](double tl, const VectorXcd& xs) {
                                 record(phase.t_begin + tl, xs);
                             },
                             local_times);
        }
    }
    if (options.boxcar_window > 0.0) return boxcar_average(trace, options.boxcar_window);
    return trace;
}

} // namespace

DynamicsTrace step_response(const SystemParams& params, const ShellDiscretization& disc,
                            double t_end, double sample_dt, const TraceOptions& options) {
    return run_piecewise(params, disc, 0.0, t_end, sample_dt, options, false);
}

DynamicsTrace switchoff_response(const SystemParams& params, const ShellDiscretization& disc,
                                 double t_off, double t_end, double sample_dt,
                                 const TraceOptions& options) {
    return run_piecewise(params, disc, t_off, t_end, sample_dt, options, true);
}

double shell_steady_reflectivity(const SystemParams& params, const ShellDiscretization& disc) {
    const cplx chi = chi_shells(params.drive.delta, params.g_collective,
                                params.ensemble.gamma, params.ensemble.gamma0,
                                params.drive.omega_c, disc.intensities, disc.beta).value;
    const cplx a_in(std::sqrt(params.drive.input_flux), 0.0);
    return reflectivity_transmittivity(params.drive.delta, chi, params.cavity, a_in)
        .reflectivity;
}

DynamicsTrace boxcar_average(const DynamicsTrace& trace, double window) {
    if (window <= 0.0) return trace;
    DynamicsTrace out;
    out.rows.reserve(trace.rows.size());
    std::size_t lo = 0;
    double sum_r = 0.0, sum_n = 0.0;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        sum_r += trace.rows[i].reflectivity;
        sum_n += trace.rows[i].photon_number;
        while (trace.rows[i].t - trace.rows[lo].t > window) {
            sum_r -= trace.rows[lo].reflectivity;
            sum_n -= trace.rows[lo].photon_number;
            ++lo;
        }
        const double n = static_cast<double>(i - lo + 1);
        out.rows.push_back({trace.rows[i].t, sum_r / n, sum_n / n});
    }
    return out;
}

} // namespace eitlab
