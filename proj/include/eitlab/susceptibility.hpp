#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eitlab/units.hpp"

namespace eitlab {

enum class ChiVariant { discrete, continuous, canonical, quadrature };

// Effective saturation parameter of the two-photon transition,
// Theta = (Omega_c^2/2) / ((gamma - i Delta)(gamma0 - i Delta)).
// The gamma0 = 0, Delta = 0 pole is legal; it is represented as an
// infinite value and the log-form limit ln(1+Theta)/Theta -> 0 applies.
struct SaturationTheta {
    cplx value;
    bool infinite = false;
};

struct ComplexSusceptibility {
    cplx value;          // rad/s
    ChiVariant variant;
};

SaturationTheta theta(double delta, double gamma, double gamma0, double omega_c);

// Continuous-medium susceptibility: chi = i g_N^2/(gamma - i Delta) * ln(1+Theta)/Theta,
// principal log branch, series fallback for |Theta| < 1e-6.
ComplexSusceptibility chi_continuous(double delta, double g_collective, double gamma,
                                     double gamma0, double omega_c);

// Homogeneous-control form: chi0 = i g_N^2/(gamma - i Delta) / (1 + Theta).
ComplexSusceptibility chi_canonical(double delta, double g_collective, double gamma,
                                    double gamma0, double omega_c);

// Per-ion sum over radial positions with Gaussian mode weighting.
ComplexSusceptibility chi_discrete(std::span<const double> radial_positions,
                                   double g_single, double gamma, double gamma0,
                                   double omega_c, double delta,
                                   double waist_probe, double waist_control);

// Independent quadrature oracle: chi = i g_N^2 * int_0^1 du /
// (gamma - i Delta + (Omega_c^2/2) u^beta / (gamma0 - i Delta)),
// beta = w_p^2 / w_c^2. Adaptive Gauss-Kronrod to 1e-10 relative.
ComplexSusceptibility chi_quadrature(double delta, double g_collective, double gamma,
                                     double gamma0, double omega_c, double beta = 1.0);

// Shell-discretized susceptibility matching the dynamics module's radial shells.
ComplexSusceptibility chi_shells(double delta, double g_collective, double gamma,
                                 double gamma0, double omega_c,
                                 std::span<const double> shell_intensities, double beta = 1.0);

// Deterministic seeded sampling of ion radial positions, uniform areal
// density over a disk of the given radius.
std::vector<double> sample_disk_positions(std::size_t count, double disk_radius,
                                          std::uint64_t seed);

} // namespace eitlab
