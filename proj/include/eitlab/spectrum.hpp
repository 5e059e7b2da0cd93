#pragma once

#include <vector>

#include "eitlab/params.hpp"
#include "eitlab/susceptibility.hpp"

namespace eitlab {

struct SpectrumRow {
    double delta;          // rad/s
    double reflectivity;
    double transmittivity;
    double photon_number;
};

struct SpectrumTable {
    std::vector<SpectrumRow> rows;
};

struct DipFeature {
    double center;   // rad/s
    double hwhm;     // rad/s
    double depth;
    double baseline;
};

struct no_dip_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Steady-state intracavity amplitude a = sqrt(2 kappa_H) a_in / (kappa - i Delta - i chi).
cplx intracavity_amplitude(double delta, const cplx& chi, double kappa,
                           double kappa_high, const cplx& a_in);

struct ReflTrans {
    double reflectivity;
    double transmittivity;
};

ReflTrans reflectivity_transmittivity(double delta, const cplx& chi,
                                      const CavityRates& rates, const cplx& a_in);

// Susceptibility of the selected variant for the given system parameters.
cplx evaluate_chi(const SystemParams& params, double delta, ChiVariant variant,
                  int shells = 64, double beta = 1.0);

SpectrumTable scan_spectrum(const SystemParams& params, double delta_min,
                            double delta_max, double step,
                            ChiVariant variant = ChiVariant::continuous);

// Transparency dip at two-photon resonance. Baseline is the no-control
// absorptive reflectivity at Delta = 0; the half width is located by
// bisection to 1 Hz.
DipFeature transparency_dip(const SystemParams& params,
                            ChiVariant variant = ChiVariant::continuous);

// |a(with ions)/a(bare cavity)|^2 at Delta = 0.
double atomic_transparency(const SystemParams& params,
                           ChiVariant variant = ChiVariant::continuous);

// Narrow-window HWHM of the canonical homogeneous-control model,
// gamma0 + Omega_c^2 / (2 gamma (1 + 2C)). The textbook form printed with
// Omega_c^2/2 over the bare (1+2C) is available for documentation via
// as_printed = true; it is not dimensionally consistent and is never used
// in analysis.
double canonical_eit_hwhm(const SystemParams& params, bool as_printed = false);

} // namespace eitlab
