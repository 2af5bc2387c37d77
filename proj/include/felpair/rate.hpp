#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "felpair/entanglement.hpp"
#include "felpair/quadrature.hpp"
#include "felpair/volkov.hpp"

namespace felpair {

enum class Frame { Lab, ElectronFrame };

// Emission directions of the two photons. Zenith from the +z (undulator)
// axis, azimuths free; the frame tag is explicit because the aberration map
// between Z and Z' is a factor-gamma squeeze.
struct AngularConfig {
  double z1 = 0.0, a1 = 0.0;
  double z2 = 0.0, a2 = 0.0;
  Frame frame = Frame::ElectronFrame;
};

// Ideal detector: energy windows (lab) for the two photons plus a circular
// aperture both photons must traverse.
struct DetectorWindow {
  std::array<double, 2> photon1_window_ev = {0.0, 0.0};
  std::array<double, 2> photon2_window_ev = {0.0, 0.0};
  double aperture_zenith = 0.0;   // lab, rad
  double aperture_azimuth = 0.0;  // lab, rad
  double aperture_radius = 0.0;   // lab, rad
  std::vector<int> n_channels = {1};
};

// One point of the differential rate dW/dk1^0 dOmega_1 dOmega_2 in the EF,
// with the per-channel breakdown and per-helicity-pair squared amplitudes.
struct RateSample {
  double k1_energy = 0.0;  // EF, eV
  AngularConfig angles;    // EF
  double rate = 0.0;       // natural units, helicity-summed, spin-averaged
  std::map<int, double> rate_by_channel;
  std::array<double, 4> helicity_channel_m2 = {};  // ++, +-, -+, --
  double m2_total = 0.0;                           // M-bar at this point
  bool channel_open = false;
  bool helicity_summed = true;
};

// Differential and detector-integrated two-photon emission rates.
//
// The drop through the formula chain: helicity block -> M-bar ->
// dW/dk1^0 dOmega_1 dOmega_2 =
//   sum_n k1^0 (k2^0)^2 Theta(q_i^0 + n k^0 - k1^0 - k2^0) M-bar_n
//   / ((2 pi)^5 * 16 * q_i^0 * |(q_i + n k - k1).k2|),
// with spinors normalized to ubar u = 2m and the initial spin averaged.
class RateCalculator {
 public:
  RateCalculator(const DerivedBeamQuantities& dbq, FloquetSettings floquet = {});

  const DerivedBeamQuantities& beam() const { return dbq_; }
  const PairAmplitudeEngine& engine() const { return engine_; }

  // EF differential rate at the requested channels. Closed channels
  // contribute zero and are flagged rather than raised.
  RateSample differential_rate(const std::vector<int>& n_channels,
                               double k1_energy_ef,
                               const AngularConfig& ef_angles) const;

  // Single-channel convenience.
  RateSample differential_rate(int n, double k1_energy_ef,
                               const AngularConfig& ef_angles) const;

  // Per-electron pair probability through the detector for one undulator
  // transit: the EF rate integrated over the lab aperture and photon-1
  // energy window (with the photon-2 window as a clamp on the energy
  // domain), times the EF interaction time.
  double pair_rate_through_detector(const DetectorWindow& window,
                                    const QuadratureOptions& opt = {}) const;

  // Single-point reduction U_pair = T * F_L * F_S1 * F_S2 * dW_EF at a
  // co-propagating probe: both photons along the lab direction with
  // gamma tan(Z) = probe, photon 1 at omega_fd/3 (lab) unless overridden.
  struct UPairResult {
    double u_pair = 0.0;     // per eV per sr^2, lab parameterization
    double m2 = 0.0;         // dimensionless M-bar at the probe
    double k1_energy_ef = 0.0;
    double zenith_ef = 0.0;
  };
  UPairResult u_pair(double gamma_tan_z,
                     std::optional<double> k1_energy_lab = std::nullopt,
                     int n = 1) const;

  // EF interaction time for one transit, T = N_periods lambda_u / (gamma beta)
  // converted to natural units. Isolated here because every per-pulse
  // probability hangs off this one definition.
  double interaction_time_ef() const;

  // Jacobians of the lab -> EF maps at fixed direction:
  // F_L = d omega'/d omega_L = gamma (1 - beta cos Z_L), and per photon
  // F_S = d Omega'/d Omega_L = 1 / (gamma^2 (1 - beta cos Z_L)^2).
  double lorentz_energy_jacobian(double zenith_lab) const;
  double solid_angle_jacobian(double zenith_lab) const;

  // Rate-weighted density matrix averaged over the detector aperture at
  // fixed lab photon-1 energy (both photons through the same hole).
  struct ApertureAverage {
    TwoPhotonDensityMatrix state;
    EntanglementReport report;
    double mean_rate = 0.0;
    double rate_integral = 0.0;
    bool converged = false;
  };
  ApertureAverage aperture_density_matrix(const DetectorWindow& window,
                                          double k1_energy_lab, int n = 1,
                                          const QuadratureOptions& opt = {}) const;

 private:
  RateSample rate_at(const std::vector<int>& n_channels, double k1_energy_ef,
                     const Vec3& dir1, const Vec3& dir2) const;

  DerivedBeamQuantities dbq_;
  PairAmplitudeEngine engine_;
};

// Direction inside a circular aperture: geodesic polar coordinates
// (rho <= radius, psi) around the center direction; returns lab (Z, A).
// Stable for the forward cone where Z ~ 1e-5 rad.
std::pair<double, double> aperture_direction(double center_zenith,
                                             double center_azimuth, double rho,
                                             double psi);

}  // namespace felpair
