#pragma once

#include <optional>
#include <string>
#include <vector>

#include "felpair/four_vector.hpp"

namespace felpair {

// Machine parameters of the FEL, as configured (SI / eV units).
struct FelParameters {
  double electron_energy_ev = 0.0;
  double charge_per_pulse_c = 0.0;
  double peak_current_a = 0.0;
  double repetition_rate_hz = 0.0;
  double undulator_peak_field_t = 0.0;    // B_0
  double undulator_period_length_m = 0.0; // lambda_u
  int undulator_period_number = 0;
  double pierce_parameter = 0.0;
  std::optional<double> fundamental_wavelength_m;  // cross-check only
  std::optional<double> saturation_peak_power_w;   // metadata
  std::optional<double> emission_pulse_fwhm_s;     // metadata

  // LCLS working point used throughout the test suite.
  static FelParameters lcls();
};

// Everything derived from FelParameters. Natural units (eV) unless noted.
//
// The electron frame (EF) is defined by the pulse's initial average
// velocity; the representative electron starts at rest there. The undulator
// field appears in the EF as a quasi-EM wave whose exact wave vector
// gamma*k_u*(beta,0,0,-1) is slightly off the light cone (k.k = -k_u^2).
// All amplitude work uses the lightlike idealization k = gamma*k_u*(1,0,0,-1),
// which keeps the Volkov states exact and reproduces the fundamental
// frequency formula; the exact virtuality is kept as a diagnostic.
struct DerivedBeamQuantities {
  double gamma = 0.0;
  double beta = 0.0;
  double undulator_parameter = 0.0;  // K = e B0 / (m k_u)
  double potential_amplitude = 0.0;  // a = B0/k_u in natural units [eV]
  double coupling_ea = 0.0;          // e a = K m [eV]
  double mass_shift_e2a2 = 0.0;      // e^2 a^2 = K^2 m^2 [eV^2]
  double effective_mass = 0.0;       // m* = m sqrt(1+K^2) [eV]
  double undulator_wavenumber = 0.0; // k_u = 2 pi hbar c / lambda_u [eV]
  double undulator_period_length_m = 0.0;
  int undulator_periods = 0;
  double wave_photon_energy = 0.0;   // k^0 = gamma k_u [eV]
  FourVector wave_vector;            // k (EF, lightlike idealization)
  double wave_virtuality = 0.0;      // exact k.k = -k_u^2 [eV^2] (diagnostic)
  double fundamental_energy = 0.0;   // hbar omega_fd, lab [eV]
  double fundamental_wavelength_m = 0.0;
  long long electrons_per_pulse = 0; // N_e
  FourVector electron_quasimomentum; // q_i of the EF rest electron [eV]
};

// Throws ConfigError on nonpositive magnitudes or a fundamental-wavelength
// cross-check failing at the 1% level.
DerivedBeamQuantities derive_beam_quantities(const FelParameters& params);

// Quasi-EM wave potential a*(0, cos(k.x), sin(k.x), 0) at EF position x.
FourVector quasi_em_wave(const DerivedBeamQuantities& dbq, const FourVector& x);

// q = p + (e^2 a^2 / (2 k.p)) k. Throws DegenerateKinematicsError at k.p = 0.
FourVector quasi_momentum(const FourVector& p, const DerivedBeamQuantities& dbq);

// Zenith-angle aberration between the electron frame and the lab,
// gamma tan(Z) = sin(Z') / (beta + cos(Z')), and its inverse. Stable for
// the forward cone Z ~ 1/gamma.
double zenith_angle_lab(double zenith_ef, const DerivedBeamQuantities& dbq);
double zenith_angle_ef(double zenith_lab, const DerivedBeamQuantities& dbq);

// Doppler maps for photon energies at fixed propagation direction.
double photon_energy_lab(double energy_ef, double zenith_ef,
                         const DerivedBeamQuantities& dbq);
double photon_energy_ef(double energy_lab, double zenith_lab,
                        const DerivedBeamQuantities& dbq);

// Stable 1 - beta*cos(Z) and 1 + beta*cos(Z') helpers (both O(1/gamma^2)
// in the forward cone, where naive subtraction loses precision).
double one_minus_beta_cos(double zenith_lab, const DerivedBeamQuantities& dbq);
double one_plus_beta_cos(double zenith_ef, const DerivedBeamQuantities& dbq);

// Second photon of the pair-emission channel DE(n): given n, photon 1 and
// the direction of photon 2, returns the lightlike k2 along dir2 satisfying
// (q_i + n k - k1).k2 = q_i.(n k) - q_i.k1 - n k.k1, i.e. four-momentum
// conservation with the final quasi-momentum on the m* shell. The constraint
// is linear in the photon energy, so at most one positive-energy solution
// exists; the vector form keeps the root-listing contract.
// Throws ChannelClosedError when no positive-energy solution exists.
std::vector<FourVector> solve_pair_kinematics(int n, const FourVector& k1,
                                              const Vec3& dir2,
                                              const DerivedBeamQuantities& dbq);

// Fully resolved pair kinematics for one emission channel.
struct PairKinematics {
  int n = 0;
  FourVector k1, k2;      // emitted photons (EF)
  FourVector q_i, q_f;    // quasi-momenta (EF)
  FourVector p_f;         // free momentum of the final electron
  double de_denominator;  // (q_i + n k - k1).k2
  double constraint_residual;  // ((k1+k2-q_i-nk)^2 - m*^2) / (q_i^0)^2
};

PairKinematics pair_kinematics(int n, const Vec3& dir1, double k1_energy,
                               const Vec3& dir2,
                               const DerivedBeamQuantities& dbq);

}  // namespace felpair
