#include "eitlab/susceptibility.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "eitlab/params.hpp"
#include "eitlab/quadrature.hpp"

namespace eitlab {

namespace {

// ln(1+z)/z on the principal branch, with a series fallback near z = 0.
cplx log1p_over(const cplx& z) {
    if (std::abs(z) < 1e-6)
        return 1.0 + z * (-0.5 + z * (1.0 / 3.0 + z * (-0.25)));
    return std::log(1.0 + z) / z;
}

} // namespace

SaturationTheta theta(double delta, double gamma, double gamma0, double omega_c) {
    if (gamma <= 0.0) throw invalid_parameter("theta: gamma must be positive");
    if (gamma0 < 0.0) throw invalid_parameter("theta: gamma0 must be non-negative");
    const cplx denom = (cplx(gamma, -delta)) * (cplx(gamma0, -delta));
    if (denom == cplx(0.0, 0.0)) {
        if (omega_c == 0.0) return SaturationTheta{cplx(0.0, 0.0), false};
        // gamma0 = 0 on two-photon resonance: Theta diverges, downstream
        // log-form limits are finite.
        return SaturationTheta{cplx(std::numeric_limits<double>::infinity(), 0.0), true};
    }
    return SaturationTheta{omega_c * omega_c / 2.0 / denom, false};
}

ComplexSusceptibility chi_continuous(double delta, double g_collective, double gamma,
                                     double gamma0, double omega_c) {
    const SaturationTheta th = theta(delta, gamma, gamma0, omega_c);
    const cplx prefactor = cplx(0.0, 1.0) * g_collective * g_collective / cplx(gamma, -delta);
    if (th.infinite) return {cplx(0.0, 0.0), ChiVariant::continuous};
    return {prefactor * log1p_over(th.value), ChiVariant::continuous};
}

ComplexSusceptibility chi_canonical(double delta, double g_collective, double gamma,
                                    double gamma0, double omega_c) {
    const SaturationTheta th = theta(delta, gamma, gamma0, omega_c);
    const cplx prefactor = cplx(0.0, 1.0) * g_collective * g_collective / cplx(gamma, -delta);
    if (th.infinite) return {cplx(0.0, 0.0), ChiVariant::canonical};
    return {prefactor / (1.0 + th.value), ChiVariant::canonical};
}

ComplexSusceptibility chi_discrete(std::span<const double> radial_positions,
                                   double g_single, double gamma, double gamma0,
                                   double omega_c, double delta,
                                   double waist_probe, double waist_control) {
    if (waist_probe <= 0.0 || waist_control <= 0.0)
        throw invalid_parameter("chi_discrete: waists must be positive");
    const double g_bar_sq = g_single * g_single / 2.0; // thermal 1/sqrt(2) average
    const double omega_bar_sq = omega_c * omega_c / 2.0;
    const cplx ground = cplx(gamma0, -delta);
    if (ground == cplx(0.0, 0.0) && omega_bar_sq > 0.0)
        return {cplx(0.0, 0.0), ChiVariant::discrete};
    cplx sum{0.0, 0.0};
    for (double r : radial_positions) {
        const double psi_p_sq = std::exp(-2.0 * r * r / (waist_probe * waist_probe));
        const double psi_c_sq = std::exp(-2.0 * r * r / (waist_control * waist_control));
        cplx denom = cplx(gamma, -delta);
        if (omega_bar_sq > 0.0) denom += omega_bar_sq * psi_c_sq / ground;
        sum += cplx(0.0, g_bar_sq * psi_p_sq) / denom;
    }
    return {sum, ChiVariant::discrete};
}

ComplexSusceptibility chi_quadrature(double delta, double g_collective, double gamma,
                                     double gamma0, double omega_c, double beta) {
    if (beta <= 0.0) throw invalid_parameter("chi_quadrature: beta must be positive");
    const double omega_bar_sq = omega_c * omega_c / 2.0;
    const cplx ground = cplx(gamma0, -delta);
    const cplx optical = cplx(gamma, -delta);
    if (ground == cplx(0.0, 0.0) && omega_bar_sq > 0.0)
        return {cplx(0.0, 0.0), ChiVariant::quadrature}; // perfect transparency limit
    const cplx integral = integrate_gk(
        [&](double u) {
            cplx denom = optical;
            if (omega_bar_sq > 0.0) denom += omega_bar_sq * std::pow(u, beta) / ground;
            return cplx(0.0, 1.0) / denom;
        },
        0.0, 1.0, 1e-10);
    return {g_collective * g_collective * integral, ChiVariant::quadrature};
}

ComplexSusceptibility chi_shells(double delta, double g_collective, double gamma,
                                 double gamma0, double omega_c,
                                 std::span<const double> shell_intensities, double beta) {
    const double omega_bar_sq = omega_c * omega_c / 2.0;
    const cplx ground = cplx(gamma0, -delta);
    const cplx optical = cplx(gamma, -delta);
    const double g_sq = g_collective * g_collective /
                        static_cast<double>(std::max<std::size_t>(shell_intensities.size(), 1));
    if (ground == cplx(0.0, 0.0) && omega_bar_sq > 0.0)
        return {cplx(0.0, 0.0), ChiVariant::discrete};
    cplx sum{0.0, 0.0};
    for (double u : shell_intensities) {
        cplx denom = optical;
        if (omega_bar_sq > 0.0) denom += omega_bar_sq * std::pow(u, beta) / ground;
        sum += cplx(0.0, g_sq) / denom;
    }
    return {sum, ChiVariant::discrete};
}

std::vector<double> sample_disk_positions(std::size_t count, double disk_radius,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> positions(count);
    for (double& r : positions) r = disk_radius * std::sqrt(unit(rng));
    return positions;
}

} // namespace eitlab
