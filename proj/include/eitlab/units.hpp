#pragma once

#include <complex>

namespace eitlab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double speed_of_light = 299792458.0; // m/s

// All rates at module interfaces are quoted in "linear MHz" (angular/2pi);
// internal computation is in angular rad/s.
inline constexpr double mhz_to_rad(double mhz) { return mhz * two_pi * 1e6; }
inline constexpr double rad_to_mhz(double rad) { return rad / (two_pi * 1e6); }

inline constexpr double khz_to_rad(double khz) { return khz * two_pi * 1e3; }
inline constexpr double rad_to_khz(double rad) { return rad / (two_pi * 1e3); }

inline constexpr double us_to_s(double us) { return us * 1e-6; }
inline constexpr double s_to_us(double s) { return s * 1e6; }

} // namespace eitlab
