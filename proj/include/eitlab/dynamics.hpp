#pragma once

#include <vector>

#include "eitlab/params.hpp"
#include "eitlab/susceptibility.hpp"

namespace eitlab {

// Radial-shell reduction of the ensemble: a uniform partition of the probe
// mode intensity u in (0, 1] into M cells. Each shell carries an equal
// collective probe coupling G_k = g_N / sqrt(M) and sees a control Rabi
// frequency scaled by u_k^(beta/2), so the shell steady state reproduces the
// midpoint rule for the continuous-medium susceptibility integral.
struct ShellDiscretization {
    int shell_count = 64;
    double beta = 1.0;
    std::vector<double> intensities;   // u_k, strictly decreasing midpoints

    std::vector<double> control_scales() const; // u_k^(beta/2)
};

ShellDiscretization discretize(int shell_count, double beta = 1.0);

struct TraceRow {
    double t;              // s
    double reflectivity;
    double photon_number;
};

struct ShellState {
    std::vector<cplx> dipoles;      // sigma_k
    std::vector<cplx> coherences;   // s_k
    cplx field;                     // a
};

struct DynamicsTrace {
    std::vector<TraceRow> rows;
    std::vector<ShellState> snapshots;   // optional, one per row when requested
};

enum class Propagator { eigendecomposition, adaptive_rk };

struct TraceOptions {
    Propagator method = Propagator::eigendecomposition;
    bool keep_snapshots = false;
    double rk_rel_tol = 1e-9;
    double boxcar_window = 0.0;   // s; > 0 enables detector-window averaging
};

// Probe step response: a = sigma_k = s_k = 0 at t = 0, control at steady
// state throughout, common detuning Delta from the drive block.
DynamicsTrace step_response(const SystemParams& params, const ShellDiscretization& disc,
                            double t_end, double sample_dt,
                            const TraceOptions& options = {});

// Same protocol, with the control field switched off at t_off (state
// continuous across the switch).
DynamicsTrace switchoff_response(const SystemParams& params, const ShellDiscretization& disc,
                                 double t_off, double t_end, double sample_dt,
                                 const TraceOptions& options = {});

// Steady-state reflectivity implied by the shell model, for consistency checks.
double shell_steady_reflectivity(const SystemParams& params, const ShellDiscretization& disc);

// Boxcar average of the reflectivity column over a trailing window.
DynamicsTrace boxcar_average(const DynamicsTrace& trace, double window);

} // namespace eitlab
