#include "support/perturbative.hpp"

#include <array>
#include <cmath>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair::testing {

namespace {
const Complex I{0.0, 1.0};
}

PerturbativePair solve_free_kinematics(const DerivedBeamQuantities& dbq,
                                       double k1_energy, const Vec3& dir1,
                                       const Vec3& dir2) {
  const double m = constants::electron_mass_ev;
  FourVector p_i{m, 0.0, 0.0, 0.0};
  PerturbativePair out;
  out.k1 = {k1_energy, k1_energy * dir1[0], k1_energy * dir1[1],
            k1_energy * dir1[2]};
  FourVector w = p_i + dbq.wave_vector - out.k1;
  double num = mass_squared(w) - m * m;
  double den = 2.0 * (w.t - (w.x * dir2[0] + w.y * dir2[1] + w.z * dir2[2]));
  double e2 = num / den;
  if (!(e2 > 0.0))
    throw ChannelClosedError("free pair kinematics closed at this direction");
  out.k2 = {e2, e2 * dir2[0], e2 * dir2[1], e2 * dir2[2]};
  out.p_f = w - out.k2;
  return out;
}

Complex perturbative_amplitude(const DerivedBeamQuantities& dbq,
                               const PerturbativePair& kin,
                               const CFourVector& eps1, const CFourVector& eps2,
                               int r_i, int r_f) {
  const auto& D = DiracAlgebra::get();
  const double m = constants::electron_mass_ev;
  const double a = dbq.potential_amplitude;

  FourVector p_i{m, 0.0, 0.0, 0.0};

  // Insertions along the electron line: wave absorption (+k, coupling
  // (a/2)(x + i y)) and the two photon emissions (-k_j, conjugated
  // polarizations).
  CFourVector w_pol{0.0, 0.5 * a, 0.5 * a * I, 0.0};
  struct Insertion {
    Matrix4c vertex;
    FourVector transfer;
  };
  std::array<Insertion, 3> ins = {
      Insertion{D.slash(w_pol), dbq.wave_vector},
      Insertion{D.slash(conj(eps1)), -kin.k1},
      Insertion{D.slash(conj(eps2)), -kin.k2},
  };

  Vector4c u_i = spinor_u(p_i, r_i, m);
  Eigen::Matrix<Complex, 1, 4> ubar_f =
      spinor_u(kin.p_f, r_f, m).adjoint() * D.gamma(0);

  auto propagator = [&](const FourVector& p) {
    double den = mass_squared(p) - m * m;
    return Matrix4c((D.slash(p) + m * D.unit()) / den);
  };

  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  Complex total{0.0, 0.0};
  for (const auto& perm : perms) {
    const Insertion& first = ins[perm[0]];
    const Insertion& second = ins[perm[1]];
    const Insertion& third = ins[perm[2]];
    FourVector p1 = p_i + first.transfer;
    FourVector p2 = p1 + second.transfer;
    Vector4c right = propagator(p1) * (first.vertex * u_i);
    right = propagator(p2) * (second.vertex * right);
    total += (ubar_f * (third.vertex * right))(0, 0);
  }
  double e3 = std::pow(constants::e_natural, 3);
  return e3 * total;
}

double perturbative_mbar(const DerivedBeamQuantities& dbq, double k1_energy,
                         const Vec3& dir1, const Vec3& dir2) {
  PerturbativePair kin = solve_free_kinematics(dbq, k1_energy, dir1, dir2);
  auto angles_of = [](const Vec3& d) {
    double zen = std::atan2(std::hypot(d[0], d[1]), d[2]);
    double az = (d[0] == 0.0 && d[1] == 0.0) ? 0.0 : std::atan2(d[1], d[0]);
    return std::pair<double, double>{zen, az};
  };
  auto [z1, a1] = angles_of(dir1);
  auto [z2, a2] = angles_of(dir2);
  double sum = 0.0;
  for (int h1 : {+1, -1}) {
    for (int h2 : {+1, -1}) {
      CFourVector e1 = helicity_polarization(z1, a1, h1);
      CFourVector e2 = helicity_polarization(z2, a2, h2);
      for (int ri = 1; ri <= 2; ++ri)
        for (int rf = 1; rf <= 2; ++rf)
          sum += std::norm(perturbative_amplitude(dbq, kin, e1, e2, ri, rf));
    }
  }
  return 0.5 * sum;
}

}  // namespace felpair::testing
