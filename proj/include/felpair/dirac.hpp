#pragma once

#include <Eigen/Dense>
#include <complex>

#include "felpair/four_vector.hpp"

namespace felpair {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

// Four-vector with complex components (polarization vectors).
struct CFourVector {
  Complex t{0.0, 0.0}, x{0.0, 0.0}, y{0.0, 0.0}, z{0.0, 0.0};
};

inline CFourVector conj(const CFourVector& v) {
  return {std::conj(v.t), std::conj(v.x), std::conj(v.y), std::conj(v.z)};
}

inline Complex cmdot(const CFourVector& a, const CFourVector& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

inline Complex cmdot(const CFourVector& a, const FourVector& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

inline CFourVector complexify(const FourVector& v) {
  return {Complex(v.t), Complex(v.x), Complex(v.y), Complex(v.z)};
}

// Gamma matrices in the Dirac representation, metric (+,-,-,-), as explicit
// numeric 4x4 complex matrices. All spinor algebra in this project is done
// numerically through these; there is no symbolic trace machinery.
class DiracAlgebra {
 public:
  static const DiracAlgebra& get();

  const Matrix4c& gamma(int mu) const { return gamma_[mu]; }
  const Matrix4c& unit() const { return unit_; }

  // gamma.v = gamma^mu v_mu for a contravariant argument.
  Matrix4c slash(const FourVector& v) const;
  Matrix4c slash(const CFourVector& v) const;

  // Dirac adjoint of a matrix, g0 M^dagger g0.
  Matrix4c bar(const Matrix4c& m) const;

  // max_{mu,nu} of entrywise |{g^mu, g^nu} - 2 g^{mu nu} 1|.
  double anticommutator_residual() const;

 private:
  DiracAlgebra();
  Matrix4c gamma_[4];
  Matrix4c unit_;
};

// Free Dirac spinor u_r(p), r in {1,2}, normalized to ubar u = 2m, spin
// quantized along the EF z axis.
Vector4c spinor_u(const FourVector& p, int r, double mass);

// Helicity polarization vector for a photon along (zenith, azimuth):
// eps_h = -h (theta_hat + i h phi_hat)/sqrt(2), eps.k = 0, eps.eps* = -1.
CFourVector helicity_polarization(double zenith, double azimuth, int helicity);

struct PhotonMode {
  FourVector momentum;
  int helicity = +1;
  CFourVector polarization;
};

PhotonMode photon_mode(double energy, double zenith, double azimuth,
                       int helicity);

}  // namespace felpair
