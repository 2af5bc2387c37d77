#pragma once

#include <vector>

namespace felpair {

// Bessel functions of the first kind at integer order.
//
// The Floquet expansion needs the whole ladder J_0(x)..J_nmax(x) at a fixed
// small-to-moderate argument, so the natural evaluation is one downward
// (Miller) recurrence normalized with J_0 + 2 sum J_{2k} = 1. Accuracy is at
// machine level for the |x| <= 50 range exercised here; tests compare against
// std::cyl_bessel_j.

// Returns J_0(x)..J_nmax(x).
std::vector<double> bessel_j_ladder(int nmax, double x);

// Single value at signed order, J_{-n}(x) = (-1)^n J_n(x).
double bessel_j(int n, double x);

// Signed-order view over a precomputed ladder.
inline double bessel_j_signed(const std::vector<double>& ladder, int n) {
  int a = n < 0 ? -n : n;
  if (a >= static_cast<int>(ladder.size())) return 0.0;
  double v = ladder[a];
  return (n < 0 && (a & 1)) ? -v : v;
}

}  // namespace felpair
