#pragma once

#include <vector>

#include "felpair/fel_parameters.hpp"
#include "felpair/rate.hpp"

namespace felpair {

struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;   // log-space
  double rms_residual = 0.0;
};

// Least-squares slope of log(y) against log(x). Throws ContractError on
// nonpositive data or fewer than two points.
PowerLawFit fit_power_law(const std::vector<double>& x,
                          const std::vector<double>& y);

struct ScalingPoint {
  double b0_lambda_u;  // T m
  double b0_t;
  double lambda_u_m;
  double undulator_parameter;
  double u_pair;   // lab-parameterized single-point pair density
  double q_value;  // dimensionless helicity-summed squared amplitude
};

struct ScalingSeries {
  double gamma_tan_z = 0.0;  // probe, lab
  bool vary_field = true;    // scaled B0 at fixed lambda_u (else the converse)
  std::vector<ScalingPoint> points;
  // Exponent of the squared-amplitude factor (the dimensionless quantity the
  // quoted power laws describe); the raw u_pair slope is kept alongside.
  PowerLawFit q_fit;
  PowerLawFit u_pair_fit;
};

// Scans U_pair and the squared amplitude against B0*lambda_u at a fixed
// probe: lab gamma tan(Z) for both photons, photon-1 energy tracking
// omega_fd/3 as the undulator parameter changes. scale_factors multiply the
// nominal B0*lambda_u product.
ScalingSeries scan_u_pair(const FelParameters& base, double gamma_tan_z,
                          const std::vector<double>& scale_factors,
                          bool vary_field = true,
                          const FloquetSettings& floquet = {});

}  // namespace felpair
