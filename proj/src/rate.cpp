#include "felpair/rate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

namespace {
constexpr double k_two_pi = 2.0 * constants::pi;

double pow5_two_pi() {
  double p = k_two_pi;
  return p * p * p * p * p;
}
}  // namespace

RateCalculator::RateCalculator(const DerivedBeamQuantities& dbq,
                               FloquetSettings floquet)
    : dbq_(dbq), engine_(dbq, floquet) {}

RateSample RateCalculator::rate_at(const std::vector<int>& n_channels,
                                   double k1_energy_ef, const Vec3& dir1,
                                   const Vec3& dir2) const {
  RateSample sample;
  sample.k1_energy = k1_energy_ef;
  sample.channel_open = false;

  const double q0 = dbq_.electron_quasimomentum.t;
  for (int n : n_channels) {
    double channel_rate = 0.0;
    try {
      PairKinematics kin = pair_kinematics(n, dir1, k1_energy_ef, dir2, dbq_);
      HelicityAmplitudeBlock block = engine_.helicity_block(kin);
      double m2 = block.helicity_summed_m2();
      double prefactor = kin.k1.t * kin.k2.t * kin.k2.t /
                         (pow5_two_pi() * 16.0 * q0 *
                          std::fabs(kin.de_denominator));
      channel_rate = prefactor * m2;
      sample.channel_open = true;
      sample.m2_total += m2;
      for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
          sample.helicity_channel_m2[static_cast<std::size_t>(2 * i1 + i2)] +=
              block.channel_m2(i1, i2);
    } catch (const ChannelClosedError&) {
      channel_rate = 0.0;  // Theta = 0: flagged zero-rate contribution
    }
    sample.rate_by_channel[n] = channel_rate;
    sample.rate += channel_rate;
  }
  return sample;
}

RateSample RateCalculator::differential_rate(const std::vector<int>& n_channels,
                                             double k1_energy_ef,
                                             const AngularConfig& ef_angles) const {
  if (ef_angles.frame != Frame::ElectronFrame)
    throw ContractError(
        "differential_rate expects electron-frame angles; map lab angles "
        "through the kinematics module first");
  Vec3 dir1 = unit_from_spherical(ef_angles.z1, ef_angles.a1);
  Vec3 dir2 = unit_from_spherical(ef_angles.z2, ef_angles.a2);
  RateSample sample = rate_at(n_channels, k1_energy_ef, dir1, dir2);
  sample.angles = ef_angles;
  return sample;
}

RateSample RateCalculator::differential_rate(int n, double k1_energy_ef,
                                             const AngularConfig& ef_angles) const {
  return differential_rate(std::vector<int>{n}, k1_energy_ef, ef_angles);
}

double RateCalculator::interaction_time_ef() const {
  // One undulator transit seen from the EF: the lab transit takes
  // N lambda_u / beta, the proper duration divides by gamma.
  double transit_m = dbq_.undulator_periods * dbq_.undulator_period_length_m;
  return constants::length_to_natural(transit_m) / (dbq_.gamma * dbq_.beta);
}

double RateCalculator::lorentz_energy_jacobian(double zenith_lab) const {
  return dbq_.gamma * one_minus_beta_cos(zenith_lab, dbq_);
}

double RateCalculator::solid_angle_jacobian(double zenith_lab) const {
  double g = dbq_.gamma * one_minus_beta_cos(zenith_lab, dbq_);
  return 1.0 / (g * g);
}

std::pair<double, double> aperture_direction(double center_zenith,
                                             double center_azimuth, double rho,
                                             double psi) {
  double cz = std::cos(center_zenith), sz = std::sin(center_zenith);
  double ca = std::cos(center_azimuth), sa = std::sin(center_azimuth);
  double cr = std::cos(rho), sr = std::sin(rho);
  double cp = std::cos(psi), sp = std::sin(psi);

  // n = cos(rho) d + sin(rho) (cos(psi) theta_hat + sin(psi) phi_hat)
  double nx = cr * sz * ca + sr * (cp * cz * ca - sp * sa);
  double ny = cr * sz * sa + sr * (cp * cz * sa + sp * ca);

  double s_half_rho = std::sin(0.5 * rho);
  double s_half_z = std::sin(0.5 * center_zenith);
  double one_minus_nz = 2.0 * s_half_rho * s_half_rho +
                        cr * 2.0 * s_half_z * s_half_z + sr * cp * sz;
  if (one_minus_nz < 0.0) one_minus_nz = 0.0;
  double half = std::sqrt(0.5 * one_minus_nz);
  double zenith =
      half <= 1.0 ? 2.0 * std::asin(std::min(1.0, half)) : constants::pi;
  double azimuth = (nx == 0.0 && ny == 0.0) ? 0.0 : std::atan2(ny, nx);
  return {zenith, azimuth};
}

namespace {

struct LabPoint {
  double z1, a1, z2, a2;  // lab angles
  double z1_ef, z2_ef;
  Vec3 dir1_ef, dir2_ef;
};

LabPoint resolve_directions(const DerivedBeamQuantities& dbq,
                            const DetectorWindow& w, double rho1, double psi1,
                            double rho2, double psi2) {
  LabPoint p;
  auto [z1, a1] =
      aperture_direction(w.aperture_zenith, w.aperture_azimuth, rho1, psi1);
  auto [z2, a2] =
      aperture_direction(w.aperture_zenith, w.aperture_azimuth, rho2, psi2);
  p.z1 = z1;
  p.a1 = a1;
  p.z2 = z2;
  p.a2 = a2;
  p.z1_ef = zenith_angle_ef(z1, dbq);
  p.z2_ef = zenith_angle_ef(z2, dbq);
  p.dir1_ef = unit_from_spherical(p.z1_ef, a1);
  p.dir2_ef = unit_from_spherical(p.z2_ef, a2);
  return p;
}

// Lab energy of photon 2 once photon 1 takes k1_lab at the given directions;
// NaN when the channel is closed.
double photon2_lab_energy(const DerivedBeamQuantities& dbq, int n,
                          const LabPoint& p, double k1_lab) {
  double k1_ef = photon_energy_ef(k1_lab, p.z1, dbq);
  FourVector k1{k1_ef, k1_ef * p.dir1_ef[0], k1_ef * p.dir1_ef[1],
                k1_ef * p.dir1_ef[2]};
  try {
    FourVector k2 = solve_pair_kinematics(n, k1, p.dir2_ef, dbq).front();
    return photon_energy_lab(k2.t, p.z2_ef, dbq);
  } catch (const ChannelClosedError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// The photon-2 lab energy decreases monotonically in k1 over these windows;
// clamp the k1 integration range so omega_2 stays inside its own window.
bool clamp_energy_interval(const DerivedBeamQuantities& dbq, int n,
                           const LabPoint& p, const DetectorWindow& w,
                           double& lo, double& hi) {
  lo = w.photon1_window_ev[0];
  hi = w.photon1_window_ev[1];
  if (!(hi > lo)) return false;
  double w2lo = w.photon2_window_ev[0];
  double w2hi = w.photon2_window_ev[1];

  double f_lo = photon2_lab_energy(dbq, n, p, lo);
  double f_hi = photon2_lab_energy(dbq, n, p, hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) return false;
  if (f_lo < w2lo || f_hi > w2hi) return false;  // fully outside

  auto bisect = [&](double target) {
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (a + b);
      double v = photon2_lab_energy(dbq, n, p, mid);
      if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
      if (v > target)
        a = mid;
      else
        b = mid;
      if (b - a < 1e-12 * std::max(1.0, std::fabs(b))) break;
    }
    return 0.5 * (a + b);
  };

  if (f_lo > w2hi) {
    double cut = bisect(w2hi);
    if (std::isnan(cut)) return false;
    lo = cut;
  }
  if (f_hi < w2lo) {
    double cut = bisect(w2lo);
    if (std::isnan(cut)) return false;
    hi = cut;
  }
  return hi > lo;
}

}  // namespace

double RateCalculator::pair_rate_through_detector(
    const DetectorWindow& window, const QuadratureOptions& opt) const {
  if (window.aperture_radius <= 0.0)
    throw ConfigError("detector aperture radius must be positive");
  if (!(window.photon1_window_ev[1] >= window.photon1_window_ev[0]) ||
      !(window.photon2_window_ev[1] >= window.photon2_window_ev[0]))
    throw ConfigError("detector energy windows must be ordered [lo, hi]");
  if (window.photon1_window_ev[1] == window.photon1_window_ev[0] ||
      window.photon2_window_ev[1] == window.photon2_window_ev[0])
    return 0.0;  // measure-zero energy window

  const double time_ef = interaction_time_ef();

  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(15, 0.0, 1.0, gl_nodes, gl_weights);

  auto integrand = [&](const double* x, double* out) {
    // x = (rho1, psi1, rho2, psi2) over the lab aperture.
    LabPoint p = resolve_directions(dbq_, window, x[0], x[1], x[2], x[3]);
    double jac_solid = std::sin(x[0]) * std::sin(x[2]);
    double value = 0.0;
    for (int n : window.n_channels) {
      double lo, hi;
      if (!clamp_energy_interval(dbq_, n, p, window, lo, hi)) continue;
      double acc = 0.0;
      for (std::size_t i = 0; i < gl_nodes.size(); ++i) {
        double k1_lab = lo + (hi - lo) * gl_nodes[i];
        double k1_ef = photon_energy_ef(k1_lab, p.z1, dbq_);
        RateSample s = rate_at({n}, k1_ef, p.dir1_ef, p.dir2_ef);
        double jac = lorentz_energy_jacobian(p.z1) *
                     solid_angle_jacobian(p.z1) * solid_angle_jacobian(p.z2);
        acc += gl_weights[i] * (hi - lo) * jac * s.rate;
      }
      value += acc;
    }
    out[0] = value * jac_solid;
  };

  std::vector<double> lower = {0.0, 0.0, 0.0, 0.0};
  std::vector<double> upper = {window.aperture_radius, k_two_pi,
                               window.aperture_radius, k_two_pi};
  CubatureOutcome res = integrate_box(integrand, 4, lower, upper, 1, opt);
  if (!res.converged) {
    std::ostringstream os;
    os << "detector quadrature did not reach tolerance "
       << opt.relative_tolerance << " (error estimate " << res.error_estimate
       << " on value " << res.values[0] << " after " << res.regions
       << " regions)";
    throw ConvergenceError(os.str());
  }
  return time_ef * res.values[0];
}

RateCalculator::UPairResult RateCalculator::u_pair(
    double gamma_tan_z, std::optional<double> k1_energy_lab, int n) const {
  if (!(gamma_tan_z > 0.0))
    throw ContractError("u_pair probe requires gamma tan(Z) > 0");
  double z_lab = std::atan(gamma_tan_z / dbq_.gamma);
  double z_ef = zenith_angle_ef(z_lab, dbq_);
  double k1_lab = k1_energy_lab.value_or(dbq_.fundamental_energy / 3.0);
  double k1_ef = photon_energy_ef(k1_lab, z_lab, dbq_);

  Vec3 dir = unit_from_spherical(z_ef, 0.0);
  RateSample s = rate_at({n}, k1_ef, dir, dir);

  UPairResult r;
  r.k1_energy_ef = k1_ef;
  r.zenith_ef = z_ef;
  r.m2 = s.m2_total;
  double jac = lorentz_energy_jacobian(z_lab) * solid_angle_jacobian(z_lab) *
               solid_angle_jacobian(z_lab);
  r.u_pair = interaction_time_ef() * jac * s.rate;
  return r;
}

RateCalculator::ApertureAverage RateCalculator::aperture_density_matrix(
    const DetectorWindow& window, double k1_energy_lab, int n,
    const QuadratureOptions& opt) const {
  if (window.aperture_radius <= 0.0)
    throw ConfigError("detector aperture radius must be positive");

  const double q0 = dbq_.electron_quasimomentum.t;
  // Components: [0] rate weight, [1..32] Re/Im of the rate-weighted
  // (unnormalized) two-photon matrix, row major.
  auto integrand = [&](const double* x, double* out) {
    for (int c = 0; c < 33; ++c) out[c] = 0.0;
    LabPoint p = resolve_directions(dbq_, window, x[0], x[1], x[2], x[3]);
    double jac_solid = std::sin(x[0]) * std::sin(x[2]);
    double k1_ef = photon_energy_ef(k1_energy_lab, p.z1, dbq_);
    PairKinematics kin;
    try {
      kin = pair_kinematics(n, p.dir1_ef, k1_ef, p.dir2_ef, dbq_);
    } catch (const ChannelClosedError&) {
      return;
    }
    HelicityAmplitudeBlock block = engine_.helicity_block(kin);
    double prefactor = kin.k1.t * kin.k2.t * kin.k2.t /
                       (pow5_two_pi() * 16.0 * q0 *
                        std::fabs(kin.de_denominator));
    double jac = lorentz_energy_jacobian(p.z1) * solid_angle_jacobian(p.z1) *
                 solid_angle_jacobian(p.z2);
    double weight = prefactor * jac * jac_solid;

    Matrix4c num = Matrix4c::Zero();
    for (int ri = 0; ri < 2; ++ri) {
      for (int rf = 0; rf < 2; ++rf) {
        Eigen::Vector4cd s;
        s << block.s[ri][rf][0][0], block.s[ri][rf][0][1],
            block.s[ri][rf][1][0], block.s[ri][rf][1][1];
        num += 0.5 * s * s.adjoint();
      }
    }
    out[0] = weight * num.trace().real();
    int c = 1;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        Complex v = weight * num(i, j);
        out[c++] = v.real();
        out[c++] = v.imag();
      }
    }
  };

  std::vector<double> lower = {0.0, 0.0, 0.0, 0.0};
  std::vector<double> upper = {window.aperture_radius, k_two_pi,
                               window.aperture_radius, k_two_pi};
  CubatureOutcome res = integrate_box(integrand, 4, lower, upper, 33, opt);

  ApertureAverage avg;
  avg.converged = res.converged;
  avg.rate_integral = res.values[0];
  if (!(res.values[0] > 0.0))
    throw UndefinedStateError(
        "aperture average: zero collected rate, state undefined");

  Matrix4c m;
  int c = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      m(i, j) = Complex{res.values[c], res.values[c + 1]};
      c += 2;
    }
  // Hermitize away quadrature roundoff before normalizing.
  m = 0.5 * (m + Matrix4c(m.adjoint()));
  avg.state.rho = m / m.trace().real();
  avg.state.basis = "helicity";
  double z_ef = zenith_angle_ef(window.aperture_zenith, dbq_);
  double k1_ef = photon_energy_ef(k1_energy_lab, window.aperture_zenith, dbq_);
  Vec3 dir = unit_from_spherical(z_ef, window.aperture_azimuth);
  avg.state.kinematics = pair_kinematics(n, dir, k1_ef, dir, dbq_);
  avg.report = entanglement_report(avg.state);

  double solid = 2.0 * constants::pi *
                 (1.0 - std::cos(window.aperture_radius));
  avg.mean_rate = res.values[0] / (solid * solid);
  return avg;
}

}  // namespace felpair
