#include "eitlab/params.hpp"

#include <cmath>
#include <sstream>

namespace eitlab {

void CavityGeometry::validate() const {
    if (cavity_length <= 0.0) throw invalid_parameter("cavity length must be positive");
    if (waist_probe <= 0.0 || waist_control <= 0.0)
        throw invalid_parameter("waists must be positive");
    if (transmission_high_ppm < 0.0 || transmission_low_ppm < 0.0 || roundtrip_loss_ppm < 0.0)
        throw invalid_parameter("transmissions and losses must be non-negative");
    if (transmission_high_ppm + transmission_low_ppm + roundtrip_loss_ppm <= 0.0)
        throw invalid_parameter("total roundtrip loss must be positive");
    if (transmission_high_ppm < transmission_low_ppm)
        throw invalid_parameter("expected asymmetric cavity with T_H >= T_L");
}

void CavityRates::validate() const {
    if (kappa <= 0.0) throw invalid_parameter("kappa must be positive");
    if (kappa_high < 0.0 || kappa_low < 0.0)
        throw invalid_parameter("mirror decay rates must be non-negative");
    if (kappa_high + kappa_low > kappa * (1.0 + 1e-12))
        throw invalid_parameter("kappa must be at least kappa_H + kappa_L");
}

void EnsembleParams::validate() const {
    if (gamma <= 0.0) throw invalid_parameter("gamma must be positive");
    if (gamma0 < 0.0) throw invalid_parameter("gamma0 must be non-negative");
    if (gamma0 >= gamma) throw invalid_parameter("expected gamma > gamma0");
    if (n_effective < 0.0) throw invalid_parameter("N_eff must be non-negative");
}

void DriveParams::validate() const {
    if (omega_c < 0.0) throw invalid_parameter("control Rabi frequency must be non-negative");
    if (input_flux < 0.0) throw invalid_parameter("input flux must be non-negative");
}

double SystemParams::cooperativity() const {
    return eitlab::cooperativity(g_collective, cavity.kappa, ensemble.gamma);
}

void SystemParams::validate() const {
    cavity.validate();
    ensemble.validate();
    drive.validate();
    if (g_collective < 0.0) throw invalid_parameter("g_N must be non-negative");
}

CavityRates derive_cavity_rates(const CavityGeometry& geom) {
    geom.validate();
    // kappa_i = c T_i / (4 L) for each loss channel
    const double per_ppm = speed_of_light * 1e-6 / (4.0 * geom.cavity_length);
    CavityRates r;
    r.kappa_high = per_ppm * geom.transmission_high_ppm;
    r.kappa_low = per_ppm * geom.transmission_low_ppm;
    r.kappa = per_ppm * (geom.transmission_high_ppm + geom.transmission_low_ppm +
                         geom.roundtrip_loss_ppm);
    return r;
}

double cavity_finesse(const CavityGeometry& geom) {
    geom.validate();
    const double total = (geom.transmission_high_ppm + geom.transmission_low_ppm +
                          geom.roundtrip_loss_ppm) * 1e-6;
    return two_pi / total;
}

double effective_ion_number(double density, double waist_probe, double half_length) {
    if (density < 0.0 || waist_probe <= 0.0 || half_length < 0.0)
        throw invalid_parameter("effective_ion_number: bad inputs");
    return density * pi * waist_probe * waist_probe / 2.0 * half_length;
}

double total_ion_count(double length, double diameter, double density) {
    if (length < 0.0 || diameter < 0.0 || density < 0.0)
        throw invalid_parameter("total_ion_count: bad inputs");
    // prolate spheroid of given full length and diameter
    const double a = length / 2.0;
    const double b = diameter / 2.0;
    return density * 4.0 / 3.0 * pi * a * b * b;
}

double cooperativity(double g_collective, double kappa, double gamma) {
    if (kappa <= 0.0 || gamma <= 0.0)
        throw invalid_parameter("cooperativity: kappa and gamma must be positive");
    return g_collective * g_collective / (2.0 * kappa * gamma);
}

double collective_coupling(double g_single, double n_effective) {
    return g_single * std::sqrt(n_effective);
}

double photons_to_rabi(double photons, double g_c) {
    if (photons < 0.0 || g_c < 0.0) throw invalid_parameter("photons_to_rabi: bad inputs");
    // Omega_c = g_c <a_c>, with <a_c> = sqrt(n_c)
    return g_c * std::sqrt(photons);
}

double rabi_to_photons(double omega_c, double g_c) {
    if (g_c <= 0.0) throw invalid_parameter("rabi_to_photons: g_c must be positive");
    const double amp = omega_c / g_c;
    return amp * amp;
}

SystemParams apparatus_defaults() {
    SystemParams p;
    p.cavity.kappa = mhz_to_rad(2.2);
    p.cavity.kappa_high = 0.696 * p.cavity.kappa;
    p.cavity.kappa_low = (4.0 / 2154.0) * p.cavity.kappa;
    p.ensemble.gamma = mhz_to_rad(12.6);
    p.ensemble.gamma0 = khz_to_rad(1.0);
    p.drive.input_flux = 1.0;
    return p;
}

CavityRates resolve_cavity_rates(const std::optional<CavityRates>& direct,
                                 const std::optional<CavityGeometry>& geom,
                                 std::string* warnings) {
    if (!direct && !geom)
        throw invalid_parameter("no cavity rates supplied, directly or via geometry");
    if (!direct) return derive_cavity_rates(*geom);
    direct->validate();
    if (geom && warnings) {
        const CavityRates derived = derive_cavity_rates(*geom);
        if (std::abs(derived.kappa - direct->kappa) > 0.01 * direct->kappa) {
            std::ostringstream os;
            os << "cavity rates: direct kappa/2pi = " << rad_to_mhz(direct->kappa)
               << " MHz overrides geometry-derived " << rad_to_mhz(derived.kappa)
               << " MHz\n";
            *warnings += os.str();
        }
    }
    return *direct;
}

} // namespace eitlab
