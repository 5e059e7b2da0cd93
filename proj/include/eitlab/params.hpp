#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "eitlab/units.hpp"

namespace eitlab {

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mirror transmissions and losses in ppm, lengths in meters.
struct CavityGeometry {
    double cavity_length = 11.7e-3;
    double waist_probe = 37e-6;
    double waist_control = 37e-6;
    double transmission_high_ppm = 1500.0;
    double transmission_low_ppm = 4.0;
    double roundtrip_loss_ppm = 650.0;

    void validate() const;
};

// Field amplitude decay rates, rad/s.
struct CavityRates {
    double kappa = 0.0;
    double kappa_high = 0.0;
    double kappa_low = 0.0;

    void validate() const;
};

struct EnsembleParams {
    double gamma = 0.0;          // optical dipole decay rate, rad/s
    double gamma0 = 0.0;         // ground-state decoherence rate, rad/s
    double g_single = 0.0;       // single-ion coupling, rad/s
    double n_effective = 0.0;
    double density = 0.0;        // ions per m^3
    double half_length = 0.0;    // m

    void validate() const;
};

struct DriveParams {
    double omega_c = 0.0;        // control Rabi frequency, rad/s, >= 0
    double delta = 0.0;          // probe one-photon detuning, rad/s
    double input_flux = 1.0;     // |a_in|^2, photons/s

    void validate() const;
};

struct SystemParams {
    CavityRates cavity;
    EnsembleParams ensemble;
    DriveParams drive;
    double g_collective = 0.0;   // g_N = g sqrt(N_eff), rad/s

    double cooperativity() const;
    void validate() const;
};

CavityRates derive_cavity_rates(const CavityGeometry& geom);
double cavity_finesse(const CavityGeometry& geom);

double effective_ion_number(double density, double waist_probe, double half_length);
double total_ion_count(double length, double diameter, double density);
double cooperativity(double g_collective, double kappa, double gamma);
double collective_coupling(double g_single, double n_effective);

// Control intracavity photon number <-> Rabi frequency; needs the single-ion
// control coupling g_c, which is an explicit input.
double photons_to_rabi(double photons, double g_c);
double rabi_to_photons(double omega_c, double g_c);

// Canonical parameter preset: kappa/2pi = 2.2 MHz, gamma/2pi = 12.6 MHz,
// gamma0/2pi = 1 kHz, w_p = w_c = 37 um, kappa_H/kappa = 0.696.
SystemParams apparatus_defaults();

// Resolve final rates from optionally-supplied direct values and apparatus
// geometry. Direct values win; a consistency warning is appended to
// `warnings` when both are given and disagree beyond 1%.
CavityRates resolve_cavity_rates(const std::optional<CavityRates>& direct,
                                 const std::optional<CavityGeometry>& geom,
                                 std::string* warnings = nullptr);

} // namespace eitlab
