#include "felpair/fel_parameters.hpp"

#include <cmath>
#include <sstream>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "fel parameter '" << name << "' must be a positive finite number, got "
       << v;
    throw ConfigError(os.str());
  }
}

}  // namespace

FelParameters FelParameters::lcls() {
  FelParameters p;
  p.electron_energy_ev = 5.0e9;
  p.charge_per_pulse_c = 180.0e-12;
  p.peak_current_a = 3.4e3;
  p.repetition_rate_hz = 120.0;
  p.undulator_peak_field_t = 1.32;
  p.undulator_period_length_m = 30.0e-3;
  p.undulator_period_number = 1392;
  p.pierce_parameter = 2.0e-3;
  p.fundamental_wavelength_m = 2.30e-9;
  p.saturation_peak_power_w = 10.0e9;
  p.emission_pulse_fwhm_s = 230.0e-15;
  return p;
}

DerivedBeamQuantities derive_beam_quantities(const FelParameters& params) {
  namespace c = constants;

  require_positive(params.electron_energy_ev, "electron_energy");
  require_positive(params.charge_per_pulse_c, "charge_per_pulse");
  require_positive(params.peak_current_a, "peak_current");
  require_positive(params.repetition_rate_hz, "repetition_rate");
  require_positive(params.undulator_peak_field_t, "undulator_peak_field");
  require_positive(params.undulator_period_length_m, "undulator_period_length");
  require_positive(params.pierce_parameter, "pierce_parameter");
  if (params.undulator_period_number <= 0)
    throw ConfigError("fel parameter 'undulator_period_number' must be positive");

  DerivedBeamQuantities d;
  const double m = c::electron_mass_ev;
  d.gamma = params.electron_energy_ev / m;
  if (d.gamma <= 1.0)
    throw ConfigError("electron_energy must exceed the electron rest energy");
  d.beta = std::sqrt((d.gamma - 1.0) * (d.gamma + 1.0)) / d.gamma;

  // K = e B0 / (m k_u), evaluated in SI.
  d.undulator_parameter = c::elementary_charge_c * params.undulator_peak_field_t *
                          params.undulator_period_length_m /
                          (2.0 * c::pi * c::electron_mass_kg * c::speed_of_light_m_s);
  const double K = d.undulator_parameter;
  d.coupling_ea = K * m;
  d.potential_amplitude = d.coupling_ea / c::e_natural;
  d.mass_shift_e2a2 = d.coupling_ea * d.coupling_ea;
  d.effective_mass = m * std::sqrt(1.0 + K * K);

  d.undulator_wavenumber = c::wavelength_to_ev(params.undulator_period_length_m);
  d.undulator_period_length_m = params.undulator_period_length_m;
  d.undulator_periods = params.undulator_period_number;
  d.wave_photon_energy = d.gamma * d.undulator_wavenumber;
  d.wave_vector = {d.wave_photon_energy, 0.0, 0.0, -d.wave_photon_energy};
  d.wave_virtuality = -d.undulator_wavenumber * d.undulator_wavenumber;

  d.fundamental_energy =
      2.0 * d.gamma * d.gamma * d.undulator_wavenumber / (1.0 + K * K);
  d.fundamental_wavelength_m = c::ev_to_wavelength(d.fundamental_energy);

  if (params.fundamental_wavelength_m) {
    double given = *params.fundamental_wavelength_m;
    double rel = std::fabs(given - d.fundamental_wavelength_m) /
                 d.fundamental_wavelength_m;
    if (rel > 0.01) {
      std::ostringstream os;
      os << "fundamental_wavelength cross-check failed: configured " << given
         << " m vs derived " << d.fundamental_wavelength_m << " m ("
         << rel * 100.0 << "% deviation, limit 1%)";
      throw ConfigError(os.str());
    }
  }

  d.electrons_per_pulse = static_cast<long long>(
      std::llround(params.charge_per_pulse_c / c::elementary_charge_c));

  FourVector p_rest{m, 0.0, 0.0, 0.0};
  d.electron_quasimomentum = quasi_momentum(p_rest, d);
  return d;
}

FourVector quasi_em_wave(const DerivedBeamQuantities& dbq, const FourVector& x) {
  double phase = mdot(dbq.wave_vector, x);
  return {0.0, dbq.potential_amplitude * std::cos(phase),
          dbq.potential_amplitude * std::sin(phase), 0.0};
}

FourVector quasi_momentum(const FourVector& p, const DerivedBeamQuantities& dbq) {
  double kp = mdot(dbq.wave_vector, p);
  double scale = dbq.wave_photon_energy * std::fabs(p.t);
  if (std::fabs(kp) < 1e-14 * scale)
    throw DegenerateKinematicsError(
        "quasi_momentum: k.p = 0, electron momentum lies on the wave front");
  return p + (dbq.mass_shift_e2a2 / (2.0 * kp)) * dbq.wave_vector;
}

double one_minus_beta_cos(double zenith_lab, const DerivedBeamQuantities& dbq) {
  // 1 - beta cos Z = (1-beta) + 2 beta sin^2(Z/2)
  double one_minus_beta = 1.0 / (dbq.gamma * dbq.gamma * (1.0 + dbq.beta));
  double s = std::sin(0.5 * zenith_lab);
  return one_minus_beta + 2.0 * dbq.beta * s * s;
}

double one_plus_beta_cos(double zenith_ef, const DerivedBeamQuantities& dbq) {
  // 1 + beta cos Z' = (1-beta) + 2 beta cos^2(Z'/2)
  double one_minus_beta = 1.0 / (dbq.gamma * dbq.gamma * (1.0 + dbq.beta));
  double cint = std::cos(0.5 * zenith_ef);
  return one_minus_beta + 2.0 * dbq.beta * cint * cint;
}

double zenith_angle_lab(double zenith_ef, const DerivedBeamQuantities& dbq) {
  // gamma tan Z = sin Z' / (beta + cos Z'); atan2 handles the
  // beta + cos Z' = 0 branch continuously (Z = pi/2).
  double sz = std::sin(zenith_ef);
  // beta + cos Z' = -(1-beta) + 2 cos^2(Z'/2), stable near Z' = pi.
  double cint = std::cos(0.5 * zenith_ef);
  double denom = 2.0 * cint * cint - 1.0 / (dbq.gamma * dbq.gamma * (1.0 + dbq.beta));
  return std::atan2(sz, dbq.gamma * denom);
}

double zenith_angle_ef(double zenith_lab, const DerivedBeamQuantities& dbq) {
  // cos Z' = (cos Z - beta) / (1 - beta cos Z); computed via half-angle
  // forms so the forward cone keeps relative precision.
  double omb = 1.0 / (dbq.gamma * dbq.gamma * (1.0 + dbq.beta));
  double s = std::sin(0.5 * zenith_lab);
  double numer = omb - 2.0 * s * s;                    // cos Z - beta
  double denom = omb + 2.0 * dbq.beta * s * s;         // 1 - beta cos Z
  double cosq = numer / denom;
  if (cosq > 1.0) cosq = 1.0;
  if (cosq < -1.0) cosq = -1.0;
  // 1 - cos Z' = (1+beta)(1-cos Z)/(1 - beta cos Z) is exact and stable;
  // use it to recover small EF angles without acos cancellation.
  double one_minus_cosq = (1.0 + dbq.beta) * (2.0 * s * s) / denom;
  if (one_minus_cosq < 0.5) {
    double half = std::sqrt(0.5 * one_minus_cosq);
    if (half > 1.0) half = 1.0;
    return 2.0 * std::asin(half);
  }
  return std::acos(cosq);
}

double photon_energy_lab(double energy_ef, double zenith_ef,
                         const DerivedBeamQuantities& dbq) {
  return dbq.gamma * energy_ef * one_plus_beta_cos(zenith_ef, dbq);
}

double photon_energy_ef(double energy_lab, double zenith_lab,
                        const DerivedBeamQuantities& dbq) {
  return dbq.gamma * energy_lab * one_minus_beta_cos(zenith_lab, dbq);
}

std::vector<FourVector> solve_pair_kinematics(int n, const FourVector& k1,
                                              const Vec3& dir2,
                                              const DerivedBeamQuantities& dbq) {
  if (n < 1) throw ContractError("solve_pair_kinematics: n must be >= 1");
  const FourVector& k = dbq.wave_vector;
  const FourVector& qi = dbq.electron_quasimomentum;

  // (q_i + n k - k1).k2 = q_i.(nk) - q_i.k1 - (nk).k1, linear in k2^0.
  FourVector w = qi + static_cast<double>(n) * k - k1;
  double rhs = n * mdot(qi, k) - mdot(qi, k1) - n * mdot(k, k1);
  double denom = w.t - (w.x * dir2[0] + w.y * dir2[1] + w.z * dir2[2]);

  std::vector<FourVector> roots;
  if (denom <= 0.0) {
    throw ChannelClosedError(
        "solve_pair_kinematics: degenerate direction, no positive-energy "
        "photon-2 solution");
  }
  double e2 = rhs / denom;
  if (!(e2 > 0.0)) {
    std::ostringstream os;
    os << "solve_pair_kinematics: channel closed at n=" << n
       << " (photon-2 energy " << e2 << " eV not positive)";
    throw ChannelClosedError(os.str());
  }
  FourVector k2{e2, e2 * dir2[0], e2 * dir2[1], e2 * dir2[2]};
  // Positive final quasi-energy is the Theta condition of the rate formula.
  double qf0 = qi.t + n * k.t - k1.t - k2.t;
  if (qf0 <= 0.0)
    throw ChannelClosedError(
        "solve_pair_kinematics: final electron energy not positive");
  roots.push_back(k2);
  return roots;
}

PairKinematics pair_kinematics(int n, const Vec3& dir1, double k1_energy,
                               const Vec3& dir2,
                               const DerivedBeamQuantities& dbq) {
  if (!(k1_energy > 0.0))
    throw ContractError("pair_kinematics: photon-1 energy must be positive");
  PairKinematics kin;
  kin.n = n;
  kin.k1 = {k1_energy, k1_energy * dir1[0], k1_energy * dir1[1],
            k1_energy * dir1[2]};
  kin.k2 = solve_pair_kinematics(n, kin.k1, dir2, dbq).front();
  kin.q_i = dbq.electron_quasimomentum;
  kin.q_f = kin.q_i + static_cast<double>(n) * dbq.wave_vector - kin.k1 - kin.k2;
  double kqf = mdot(dbq.wave_vector, kin.q_f);
  kin.p_f = kin.q_f - (dbq.mass_shift_e2a2 / (2.0 * kqf)) * dbq.wave_vector;
  kin.de_denominator =
      mdot(kin.q_i + static_cast<double>(n) * dbq.wave_vector - kin.k1, kin.k2);
  double mstar2 = dbq.effective_mass * dbq.effective_mass;
  kin.constraint_residual =
      (mass_squared(kin.k1 + kin.k2 - kin.q_i -
                    static_cast<double>(n) * dbq.wave_vector) -
       mstar2) /
      (kin.q_i.t * kin.q_i.t);
  return kin;
}

}  // namespace felpair
