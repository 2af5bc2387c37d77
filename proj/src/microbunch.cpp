#include "felpair/microbunch.hpp"

#include <cmath>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

long long MicrobunchProfile::coherent_sections() const {
  double per_section = section_population();
  if (!(per_section > 0.0))
    throw ConfigError("microbunch profile needs positive bunch populations");
  long long n_i = static_cast<long long>(
      std::floor(static_cast<double>(total_electrons) / per_section));
  if (n_i < 1)
    throw ConfigError(
        "microbunch profile holds more electrons per section than the pulse");
  return n_i;
}

double MicrobunchProfile::section_population() const {
  double s = 0.0;
  for (double v : bunch_populations) {
    if (!(v > 0.0)) throw ConfigError("bunch populations must be positive");
    s += v;
  }
  return s;
}

MicrobunchProfile MicrobunchProfile::uniform(int coherent_bunch_count,
                                             double electrons_per_bunch,
                                             long long total_electrons) {
  if (coherent_bunch_count < 1)
    throw ConfigError("coherent bunch count must be >= 1");
  MicrobunchProfile p;
  p.bunch_populations.assign(static_cast<std::size_t>(coherent_bunch_count),
                             electrons_per_bunch);
  p.total_electrons = total_electrons;
  return p;
}

double bunch_displacement_m(const DerivedBeamQuantities& dbq) {
  double k2 = dbq.undulator_parameter * dbq.undulator_parameter;
  return dbq.undulator_period_length_m / dbq.gamma * (1.0 + k2) / (2.0 + k2);
}

double phase_difference(double z1_ef, double z2_ef, double k1_energy_ef,
                        const DerivedBeamQuantities& dbq) {
  double k2 = dbq.undulator_parameter * dbq.undulator_parameter;
  double c1 = std::cos(z1_ef), c2 = std::cos(z2_ef);
  double ratio = k1_energy_ef / dbq.wave_photon_energy;
  return 2.0 * constants::pi * (1.0 + k2) *
         (1.0 + c2 - (c2 - c1) * ratio) / (2.0 + k2 * (1.0 + c2));
}

double phase_difference_from_momentum_transfer(
    double z1_ef, double z2_ef, double k1_energy_ef,
    const DerivedBeamQuantities& dbq) {
  double k2 = dbq.undulator_parameter * dbq.undulator_parameter;
  double c1 = std::cos(z1_ef), c2 = std::cos(z2_ef);
  double k0 = dbq.wave_photon_energy;
  // Photon-2 energy from the no-recoil pair constraint (n = 1); recoil
  // corrections are O(k^0/m) and belong to the amplitude module, not to
  // this long-wavelength interference model.
  double e2 = 2.0 * (k0 - k1_energy_ef * (1.0 + 0.5 * k2 * (1.0 + c1))) /
              (2.0 + k2 * (1.0 + c2));
  // delta_k_z = k1_z + k2_z - n k_z with k_z = -k^0.
  double dkz = k1_energy_ef * c1 + e2 * c2 + k0;
  double dl_natural = constants::length_to_natural(bunch_displacement_m(dbq));
  return dl_natural * dkz;
}

std::complex<double> enhancement_h(const MicrobunchProfile& profile,
                                   double delta_phi) {
  std::complex<double> h{0.0, 0.0};
  int j = 1;
  for (double nj : profile.bunch_populations) {
    h += nj * std::polar(1.0, j * delta_phi);
    ++j;
  }
  return h;
}

double f_mb(const MicrobunchProfile& profile, double z1_ef, double z2_ef,
            double k1_energy_ef, const DerivedBeamQuantities& dbq) {
  double dphi = phase_difference(z1_ef, z2_ef, k1_energy_ef, dbq);
  double h2 = std::norm(enhancement_h(profile, dphi));
  return h2 * static_cast<double>(profile.coherent_sections());
}

RateSample collective_rate(const RateSample& single_electron,
                           const MicrobunchProfile& profile,
                           const DerivedBeamQuantities& dbq) {
  if (single_electron.angles.frame != Frame::ElectronFrame)
    throw ContractError(
        "collective_rate requires an electron-frame rate sample");
  double factor = f_mb(profile, single_electron.angles.z1,
                       single_electron.angles.z2, single_electron.k1_energy,
                       dbq);
  RateSample out = single_electron;
  out.rate *= factor;
  for (auto& [n, r] : out.rate_by_channel) r *= factor;
  return out;
}

}  // namespace felpair
