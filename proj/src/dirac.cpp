#include "felpair/dirac.hpp"

#include <cmath>

#include "felpair/errors.hpp"

namespace felpair {

namespace {
const Complex I{0.0, 1.0};
}

DiracAlgebra::DiracAlgebra() {
  unit_ = Matrix4c::Identity();
  for (auto& g : gamma_) g = Matrix4c::Zero();

  // gamma^0 = diag(1,1,-1,-1)
  gamma_[0](0, 0) = 1.0;
  gamma_[0](1, 1) = 1.0;
  gamma_[0](2, 2) = -1.0;
  gamma_[0](3, 3) = -1.0;

  // gamma^i = [[0, sigma_i], [-sigma_i, 0]]
  gamma_[1](0, 3) = 1.0;
  gamma_[1](1, 2) = 1.0;
  gamma_[1](2, 1) = -1.0;
  gamma_[1](3, 0) = -1.0;

  gamma_[2](0, 3) = -I;
  gamma_[2](1, 2) = I;
  gamma_[2](2, 1) = I;
  gamma_[2](3, 0) = -I;

  gamma_[3](0, 2) = 1.0;
  gamma_[3](1, 3) = -1.0;
  gamma_[3](2, 0) = -1.0;
  gamma_[3](3, 1) = 1.0;
}

const DiracAlgebra& DiracAlgebra::get() {
  static const DiracAlgebra instance;
  return instance;
}

Matrix4c DiracAlgebra::slash(const FourVector& v) const {
  return v.t * gamma_[0] - v.x * gamma_[1] - v.y * gamma_[2] - v.z * gamma_[3];
}

Matrix4c DiracAlgebra::slash(const CFourVector& v) const {
  return v.t * gamma_[0] - v.x * gamma_[1] - v.y * gamma_[2] - v.z * gamma_[3];
}

Matrix4c DiracAlgebra::bar(const Matrix4c& m) const {
  return gamma_[0] * m.adjoint() * gamma_[0];
}

double DiracAlgebra::anticommutator_residual() const {
  double worst = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      double metric = (mu == nu) ? (mu == 0 ? 2.0 : -2.0) : 0.0;
      Matrix4c anti =
          gamma_[mu] * gamma_[nu] + gamma_[nu] * gamma_[mu] - metric * unit_;
      worst = std::max(worst, anti.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Vector4c spinor_u(const FourVector& p, int r, double mass) {
  if (r != 1 && r != 2) throw ContractError("spinor index r must be 1 or 2");
  double e = p.t;
  double npm = e + mass;
  if (!(npm > 0.0))
    throw ContractError("spinor_u: nonpositive p^0 + m");
  double root = std::sqrt(npm);

  // sigma.p acting on the chosen two-spinor.
  Complex sp[2][2] = {{Complex(p.z), Complex(p.x) - I * p.y},
                      {Complex(p.x) + I * p.y, Complex(-p.z)}};
  int idx = r - 1;
  Vector4c u;
  u(0) = (idx == 0) ? root : 0.0;
  u(1) = (idx == 1) ? root : 0.0;
  u(2) = sp[0][idx] / root;
  u(3) = sp[1][idx] / root;
  return u;
}

CFourVector helicity_polarization(double zenith, double azimuth, int helicity) {
  if (helicity != 1 && helicity != -1)
    throw ContractError("photon helicity must be +1 or -1");
  double cz = std::cos(zenith), sz = std::sin(zenith);
  double ca = std::cos(azimuth), sa = std::sin(azimuth);
  // theta_hat and phi_hat of the spherical frame at (zenith, azimuth).
  Vec3 th{cz * ca, cz * sa, -sz};
  Vec3 ph{-sa, ca, 0.0};
  double h = static_cast<double>(helicity);
  double norm = -h / std::sqrt(2.0);
  CFourVector eps;
  eps.t = 0.0;
  eps.x = norm * (th[0] + I * h * ph[0]);
  eps.y = norm * (th[1] + I * h * ph[1]);
  eps.z = norm * (th[2] + I * h * ph[2]);
  return eps;
}

PhotonMode photon_mode(double energy, double zenith, double azimuth,
                       int helicity) {
  PhotonMode mode;
  mode.momentum = lightlike_from_spherical(energy, zenith, azimuth);
  mode.helicity = helicity;
  mode.polarization = helicity_polarization(zenith, azimuth, helicity);
  return mode;
}

}  // namespace felpair
