#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "felpair/fel_parameters.hpp"
#include "felpair/microbunch.hpp"
#include "felpair/rate.hpp"
#include "felpair/volkov.hpp"

namespace felpair {

struct MicrobunchConfig {
  int coherent_bunch_count = 22;
  double electrons_per_bunch = 1.0e6;
  // Overrides the uniform profile when present; length defines N_c.
  std::optional<std::vector<double>> bunch_populations;
};

// Either an explicit [lo, hi] eV window or one tracking the derived
// fundamental: [f*omega_fd - width, f*omega_fd].
struct EnergyWindowConfig {
  std::optional<std::array<double, 2>> range_ev;
  double fraction_of_fundamental = 0.0;
  double width_ev = 0.0;

  std::array<double, 2> resolve(const DerivedBeamQuantities& dbq) const;
};

struct ApertureConfig {
  // Position either as gamma tan(Z) (paper convention) or zenith radians.
  std::optional<double> gamma_tan_z;
  std::optional<double> zenith_rad;
  double azimuth = 0.0;
  std::optional<double> radius_gamma_tan;
  std::optional<double> radius_rad;

  double resolve_zenith(const DerivedBeamQuantities& dbq) const;
  double resolve_radius(const DerivedBeamQuantities& dbq) const;
};

struct DetectorConfig {
  ApertureConfig aperture;
  EnergyWindowConfig photon1_window;
  EnergyWindowConfig photon2_window;
  std::vector<int> n_channels = {1};

  DetectorWindow resolve(const DerivedBeamQuantities& dbq) const;
};

struct SweepAxis {
  std::string name;  // Z1, Z2, A2_minus_A1, k1_energy, B0_lambda_u
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  std::string spacing = "linear";  // or "log"
};

struct SweepConfig {
  std::vector<SweepAxis> axes;
  std::map<std::string, double> fixed;
  Frame frame = Frame::Lab;
  std::vector<std::string> outputs = {"rate"};
  bool normalize = true;
};

struct ScalingConfig {
  std::vector<double> probes = {0.51, 0.60, 0.68};
  int points = 9;
  double span = 2.0;        // total factor covered in B0*lambda_u
  bool vary_field = true;   // scale B0 at fixed lambda_u (else the converse)
};

struct Config {
  FelParameters fel;
  MicrobunchConfig microbunch;
  DetectorConfig detector;
  FloquetSettings floquet;
  QuadratureOptions quadrature;
  SweepConfig sweep;
  ScalingConfig scaling;
  double density_matrix_k1_fraction = 1.0 / 3.0;  // omega_1 = f * omega_fd

  static Config from_file(const std::string& path);
  static Config from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Paper working point: LCLS Table-1 machine, omega_fd/3 and 2 omega_fd/3
  // windows 10 eV wide, aperture at gamma tan(Z) = 0.60 with radius 0.005
  // in gamma tan units, uniform 22 x 1e6 microbunch profile.
  static Config paper_default();

  MicrobunchProfile microbunch_profile(const DerivedBeamQuantities& dbq) const;
};

// FNV-1a 64-bit over the canonical serialized form.
std::string config_hash(const Config& config);

}  // namespace felpair
