#pragma once

#include <vector>

#include "felpair/dirac.hpp"
#include "felpair/fel_parameters.hpp"

namespace felpair {

// Truncation control for the Floquet sums. Evaluation runs at a given order
// and at twice that order; if the results differ by more than
// relative_tolerance in Frobenius norm the order doubles, up to max_order.
struct FloquetSettings {
  int initial_order = 8;
  double relative_tolerance = 1e-8;
  int max_order = 64;
  // |q_mid^2 - m*^2| below resonance_guard * 2|k.q_mid| raises
  // ResonanceError rather than regularizing with an unspecified width.
  // The scale 2|k.q_mid| is the per-quantum spacing of the Floquet
  // denominators, so the guard measures fractional distance to the pole.
  double resonance_guard = 1e-6;
  // The photon energies sit eight orders below the electron mass, so the
  // spinor bilinears cancel deeply before the physical amplitude emerges.
  // The default 80-bit path holds ~1e-12 relative on the physical entries;
  // quad precision is for identities probed far below that (the Ward
  // substitution cancels another six orders).
  bool quad_precision = false;
};

// Scattering matrix elements (reduced: overall delta function and box
// normalization stripped) for photon-pair emission at fixed kinematics,
// indexed by photon helicities and electron spins.
struct HelicityAmplitudeBlock {
  // [r_i-1][r_f-1][h1][h2], helicity index 0 -> +1, 1 -> -1.
  Complex s[2][2][2][2] = {};
  PairKinematics kinematics;
  int order_used = 0;
  double truncation_change = 0.0;

  Complex entry(int r_i, int r_f, int h1, int h2) const;

  // Spin-averaged (initial), spin-summed (final), helicity-summed squared
  // amplitude: (1/2) sum |s|^2. This is the M-bar of the rate formula and
  // the dimensionless quantity tracked by the scaling scans.
  double helicity_summed_m2() const;

  // (1/2) sum over spins of |s|^2 at one helicity pair (index form).
  double channel_m2(int i1, int i2) const;
};

// Amplitudes for caller-supplied polarization vectors (Ward-identity tests
// substitute the photon momentum for a polarization).
struct AmplitudeEntries {
  std::vector<Complex> values;  // [r_i][r_f][i1][i2], row-major
  int n_pol1 = 0, n_pol2 = 0;
  int order_used = 0;
  double truncation_change = 0.0;

  Complex at(int r_i, int r_f, int i1, int i2) const;
};

// Kinematics assembled directly from two photon momenta already satisfying
// the DE(n) constraint (contract checked).
PairKinematics pair_kinematics_from_photons(int n, const FourVector& k1,
                                            const FourVector& k2,
                                            const DerivedBeamQuantities& dbq);

// Two-photon (double Compton) emission amplitudes between Volkov states in
// the circularly polarized quasi-EM wave.
//
// The initial electron is the EF rest electron. Each external and internal
// electron line is expanded in Floquet harmonics of the wave; vertices
// conserve quasi-momentum harmonic by harmonic, and the internal line is the
// Volkov propagator with denominator q_mid^2 - m*^2. Both photon orderings
// are summed coherently together with the internal Floquet index n1.
//
// All methods are pure and safe for concurrent use.
class PairAmplitudeEngine {
 public:
  explicit PairAmplitudeEngine(const DerivedBeamQuantities& dbq,
                               FloquetSettings settings = {});

  const DerivedBeamQuantities& beam() const { return dbq_; }
  const FloquetSettings& settings() const { return settings_; }

  HelicityAmplitudeBlock helicity_block(int n, const Vec3& dir1,
                                        double k1_energy,
                                        const Vec3& dir2) const;
  HelicityAmplitudeBlock helicity_block(const PairKinematics& kin) const;

  // Single reduced matrix element for explicit photon modes on the DE(n)
  // surface. r_i, r_f in {1,2}.
  Complex scattering_amplitude(int n, const PhotonMode& photon1,
                               const PhotonMode& photon2, int r_i,
                               int r_f) const;

  AmplitudeEntries amplitude_entries(const PairKinematics& kin,
                                     const std::vector<CFourVector>& pols1,
                                     const std::vector<CFourVector>& pols2) const;

  // Momentum-space Volkov propagator factor (pslash_mid + m)/(q_mid^2 - m*^2)
  // with p_mid reconstructed from the quasi-momentum. Resonance-guarded.
  Matrix4c volkov_propagator(const FourVector& q_mid) const;

  // Floquet coefficient matrices F_n for n in [-order, order]; the Volkov
  // state is Psi = sum_n F_n exp(-i(q + n k).x) u_p.
  std::vector<Matrix4c> floquet_coefficients(const FourVector& p,
                                             int order) const;

 private:
  void compute_entries(const PairKinematics& kin,
                       const std::vector<CFourVector>& pols1,
                       const std::vector<CFourVector>& pols2, int order,
                       std::vector<Complex>& out) const;

  DerivedBeamQuantities dbq_;
  FloquetSettings settings_;
};

}  // namespace felpair
