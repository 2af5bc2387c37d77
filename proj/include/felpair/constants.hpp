#pragma once

#include <cmath>

// Physical constants (CODATA 2018) and unit conversions.
//
// Everything inside the library runs in natural units (hbar = c = eps0 = 1)
// with energies in eV. Lengths convert through hbar*c and times through hbar.
// Public interfaces accept and emit SI or eV only; these constants are the
// single conversion layer and are echoed into run manifests.

namespace felpair::constants {

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double electron_mass_ev = 510998.95000;        // m_e c^2
inline constexpr double fine_structure = 7.2973525693e-3;       // alpha
inline constexpr double hbar_c_ev_m = 197.3269804e-9;           // eV m
inline constexpr double hbar_ev_s = 6.582119569e-16;            // eV s
inline constexpr double elementary_charge_c = 1.602176634e-19;  // C (exact)
inline constexpr double electron_mass_kg = 9.1093837015e-31;    // kg
inline constexpr double speed_of_light_m_s = 299792458.0;       // m/s (exact)

// Electron charge in Heaviside-Lorentz natural units, e = sqrt(4 pi alpha).
inline const double e_natural = std::sqrt(4.0 * pi * fine_structure);

inline double length_to_natural(double meters) { return meters / hbar_c_ev_m; }
inline double time_to_natural(double seconds) { return seconds / hbar_ev_s; }
inline double wavelength_to_ev(double meters) {
  return 2.0 * pi * hbar_c_ev_m / meters;
}
inline double ev_to_wavelength(double ev) { return 2.0 * pi * hbar_c_ev_m / ev; }

}  // namespace felpair::constants
