#pragma once

#include <complex>
#include <vector>

#include "felpair/fel_parameters.hpp"
#include "felpair/rate.hpp"

namespace felpair {

// Longitudinal microbunch structure of the electron pulse: N_c bunches per
// coherent section with populations N_j, repeated over the pulse.
struct MicrobunchProfile {
  std::vector<double> bunch_populations;  // N_j, length N_c
  long long total_electrons = 0;          // N_e

  // N_i = floor(N_e / sum N_j); remainder electrons are dropped (at most
  // one partial section).
  long long coherent_sections() const;
  double section_population() const;  // sum N_j

  static MicrobunchProfile uniform(int coherent_bunch_count,
                                   double electrons_per_bunch,
                                   long long total_electrons);
};

// EF displacement between adjacent microbunches along the undulator axis,
// delta_l = (lambda_u / gamma)(1 + K^2)/(2 + K^2), in meters.
double bunch_displacement_m(const DerivedBeamQuantities& dbq);

// Quasi-phase-matching phase slip between adjacent microbunches for pair
// emission at EF zenith angles (Z1', Z2') and photon-1 energy k1^0 (EF, eV).
// Closed angular form; exactly 2 pi on axis for n = 1.
double phase_difference(double z1_ef, double z2_ef, double k1_energy_ef,
                        const DerivedBeamQuantities& dbq);

// Same phase slip computed as delta_l . delta_k with the photon-pair
// momenta of the no-recoil pair kinematics; agrees with phase_difference to
// machine precision and is kept as an independent route for validation.
double phase_difference_from_momentum_transfer(double z1_ef, double z2_ef,
                                               double k1_energy_ef,
                                               const DerivedBeamQuantities& dbq);

// Coherent enhancement parameter on the amplitude,
// H = sum_j N_j exp(i j dphi).
std::complex<double> enhancement_h(const MicrobunchProfile& profile,
                                   double delta_phi);

// Enhancement factor on the rate, F_MB = |H|^2 N_i.
double f_mb(const MicrobunchProfile& profile, double z1_ef, double z2_ef,
            double k1_energy_ef, const DerivedBeamQuantities& dbq);

// Collective rate for the microbunched pulse: the single-electron sample
// scaled by F_MB at its own EF kinematics. Any attached polarization state
// is untouched; microbunching retains the entanglement degree.
RateSample collective_rate(const RateSample& single_electron,
                           const MicrobunchProfile& profile,
                           const DerivedBeamQuantities& dbq);

}  // namespace felpair
