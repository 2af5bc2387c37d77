#pragma once

#include <array>
#include <string>

#include "felpair/volkov.hpp"

namespace felpair {

// Two-photon polarization state in the basis |++>, |+->, |-+>, |-->
// (helicity) or |HH>, |HV>, |VH>, |VV> (linear).
struct TwoPhotonDensityMatrix {
  Matrix4c rho = Matrix4c::Zero();
  std::string basis = "helicity";
  PairKinematics kinematics;
};

struct EntanglementReport {
  double concurrence = 0.0;
  double negativity = 0.0;
  double entanglement_of_formation = 0.0;
  std::array<double, 4> q_eigenvalues = {};  // descending
  std::string basis = "helicity";
};

// rho = (1/2) sum_{r_i, r_f} N S_{j1} S*_{j2}, N fixing unit trace; the
// electron spins are traced out. Throws UndefinedStateError on an
// identically zero block.
TwoPhotonDensityMatrix density_matrix(const HelicityAmplitudeBlock& block);

// Wootters concurrence from the spin-flipped product
// Q = rho (s2 x s2) rho* (s2 x s2). The eigenvalues are obtained from the
// Hermitian form sqrt(rho) rho_tilde sqrt(rho), which keeps them real and
// nonnegative up to clamped numerical dust. Throws ContractError if rho is
// not Hermitian/unit-trace within tolerance.
double concurrence(const Matrix4c& rho);
inline double concurrence(const TwoPhotonDensityMatrix& d) {
  return concurrence(d.rho);
}

// Sum of |negative eigenvalues| of the partial transpose (second qubit).
double negativity(const Matrix4c& rho);
inline double negativity(const TwoPhotonDensityMatrix& d) {
  return negativity(d.rho);
}

// Two-qubit closed form h((1 + sqrt(1-C^2))/2) with h the binary entropy.
double entanglement_of_formation(const Matrix4c& rho);
double entanglement_of_formation_from_concurrence(double c);

EntanglementReport entanglement_report(const TwoPhotonDensityMatrix& d);

// Same state in the linear polarization basis,
// |H> = (|+> + |->)/sqrt(2), |V> = (|+> - |->)/(i sqrt(2)).
TwoPhotonDensityMatrix to_linear_basis(const TwoPhotonDensityMatrix& d);

// The single-photon helicity -> linear transformation matrix.
Eigen::Matrix2cd helicity_to_linear_unitary();

// Descending eigenvalues of Q (exposed for the report).
std::array<double, 4> concurrence_eigenvalues(const Matrix4c& rho);

}  // namespace felpair
