#include "eitlab/spectrum.hpp"

#include <cmath>

#include "eitlab/dynamics.hpp"
#include "eitlab/parallel.hpp"

namespace eitlab {

cplx intracavity_amplitude(double delta, const cplx& chi, double kappa,
                           double kappa_high, const cplx& a_in) {
    if (kappa <= 0.0) throw invalid_parameter("intracavity_amplitude: kappa must be positive");
    return std::sqrt(2.0 * kappa_high) * a_in / (cplx(kappa, -delta) - cplx(0.0, 1.0) * chi);
}

ReflTrans reflectivity_transmittivity(double delta, const cplx& chi,
                                      const CavityRates& rates, const cplx& a_in) {
    rates.validate();
    if (a_in == cplx(0.0, 0.0))
        throw invalid_parameter("reflectivity_transmittivity: a_in must be nonzero");
    const cplx a = intracavity_amplitude(delta, chi, rates.kappa, rates.kappa_high, a_in);
    const cplx refl_ratio = std::sqrt(2.0 * rates.kappa_high) * a / a_in - 1.0;
    const double n_ratio = std::norm(a / a_in);
    return {std::norm(refl_ratio), 2.0 * rates.kappa_low * n_ratio};
}

cplx evaluate_chi(const SystemParams& params, double delta, ChiVariant variant,
                  int shells, double beta) {
    const auto& e = params.ensemble;
    switch (variant) {
        case ChiVariant::continuous:
            return chi_continuous(delta, params.g_collective, e.gamma, e.gamma0,
                                  params.drive.omega_c).value;
        case ChiVariant::canonical:
            return chi_canonical(delta, params.g_collective, e.gamma, e.gamma0,
                                 params.drive.omega_c).value;
        case ChiVariant::quadrature:
            return chi_quadrature(delta, params.g_collective, e.gamma, e.gamma0,
                                  params.drive.omega_c, beta).value;
        case ChiVariant::discrete: {
            const ShellDiscretization disc = discretize(shells, beta);
            return chi_shells(delta, params.g_collective, e.gamma, e.gamma0,
                              params.drive.omega_c, disc.intensities, beta).value;
        }
    }
    throw invalid_parameter("evaluate_chi: unknown variant");
}

SpectrumTable scan_spectrum(const SystemParams& params, double delta_min,
                            double delta_max, double step, ChiVariant variant) {
    if (step <= 0.0) throw invalid_parameter("scan_spectrum: step must be positive");
    if (delta_max < delta_min) throw invalid_parameter("scan_spectrum: empty grid");
    params.validate();
    const cplx a_in(std::sqrt(params.drive.input_flux), 0.0);
    const std::size_t count =
        static_cast<std::size_t>(std::floor((delta_max - delta_min) / step + 0.5)) + 1;
    SpectrumTable table;
    table.rows.resize(count);
    parallel_for(count, [&](std::size_t i) {
        const double delta = delta_min + static_cast<double>(i) * step;
        const cplx chi = evaluate_chi(params, delta, variant);
        const cplx a = intracavity_amplitude(delta, chi, params.cavity.kappa,
                                             params.cavity.kappa_high, a_in);
        const auto rt = reflectivity_transmittivity(delta, chi, params.cavity, a_in);
        table.rows[i] = {delta, rt.reflectivity, rt.transmittivity, std::norm(a)};
    });
    return table;
}

namespace {

double reflectivity_at(const SystemParams& params, double delta, ChiVariant variant) {
    const cplx a_in(std::sqrt(params.drive.input_flux), 0.0);
    const cplx chi = evaluate_chi(params, delta, variant);
    return reflectivity_transmittivity(delta, chi, params.cavity, a_in).reflectivity;
}

} // namespace

DipFeature transparency_dip(const SystemParams& params, ChiVariant variant) {
    params.validate();
    if (params.drive.omega_c <= 0.0)
        throw invalid_parameter("transparency_dip: control field required");

    SystemParams no_control = params;
    no_control.drive.omega_c = 0.0;
    const double baseline = reflectivity_at(no_control, 0.0, variant);
    const double r_min = reflectivity_at(params, 0.0, variant);
    const double depth = baseline - r_min;
    if (depth < 1e-6 * baseline)
        throw no_dip_error("transparency dip shallower than 1e-6 of baseline");

    const double half_level = r_min + depth / 2.0;
    // bracket the half-height crossing, then bisect to 1 Hz
    double lo = 0.0;
    double hi = params.ensemble.gamma0 + 1e-3 * params.cavity.kappa;
    while (reflectivity_at(params, hi, variant) < half_level) {
        hi *= 2.0;
        if (hi > 1e4 * params.cavity.kappa)
            throw no_dip_error("transparency dip half level not reached");
    }
    const double tol = two_pi * 1.0; // 1 Hz
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (reflectivity_at(params, mid, variant) < half_level)
            lo = mid;
        else
            hi = mid;
    }
    return {0.0, 0.5 * (lo + hi), depth, baseline};
}

double atomic_transparency(const SystemParams& params, ChiVariant variant) {
    params.validate();
    const cplx a_in(1.0, 0.0);
    const cplx chi = evaluate_chi(params, 0.0, variant);
    const cplx a = intracavity_amplitude(0.0, chi, params.cavity.kappa,
                                         params.cavity.kappa_high, a_in);
    const cplx a_bare = intracavity_amplitude(0.0, cplx(0.0, 0.0), params.cavity.kappa,
                                              params.cavity.kappa_high, a_in);
    return std::norm(a / a_bare);
}

double canonical_eit_hwhm(const SystemParams& params, bool as_printed) {
    const double omega_sq = params.drive.omega_c * params.drive.omega_c;
    const double c = params.cooperativity();
    if (as_printed) return params.ensemble.gamma0 + omega_sq / 2.0 / (1.0 + 2.0 * c);
    return params.ensemble.gamma0 +
           omega_sq / (2.0 * params.ensemble.gamma * (1.0 + 2.0 * c));
}

} // namespace eitlab
