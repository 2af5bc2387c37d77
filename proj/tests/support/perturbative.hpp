#pragma once

// Independent leading-order oracle for the weak-field limit: tree-level
// double Compton scattering off a free electron with one quantum absorbed
// from the circularly polarized wave. Free Dirac propagators and free
// kinematics throughout; nothing here touches the Volkov/Floquet machinery
// it is used to check.

#include "felpair/dirac.hpp"
#include "felpair/fel_parameters.hpp"

namespace felpair::testing {

struct PerturbativePair {
  FourVector k1, k2, p_f;
};

// Solves the free-electron conservation p_i + k = p_f + k1 + k2 for the
// photon-2 energy along dir2 (electron initially at rest).
PerturbativePair solve_free_kinematics(const DerivedBeamQuantities& dbq,
                                       double k1_energy, const Vec3& dir1,
                                       const Vec3& dir2);

// Reduced amplitude for fixed polarizations and spins: sum of the six
// orderings of {wave absorption, photon-1 emission, photon-2 emission} on
// the electron line.
Complex perturbative_amplitude(const DerivedBeamQuantities& dbq,
                               const PerturbativePair& kin,
                               const CFourVector& eps1, const CFourVector& eps2,
                               int r_i, int r_f);

// Spin-averaged, helicity-summed squared amplitude (1/2 sum |M|^2), the
// quantity compared against the strong-field engine at K -> 0.
double perturbative_mbar(const DerivedBeamQuantities& dbq, double k1_energy,
                         const Vec3& dir1, const Vec3& dir2);

}  // namespace felpair::testing
