#include "felpair/bessel.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace felpair {

std::vector<double> bessel_j_ladder(int nmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  double ax = std::fabs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }

  // Start the downward recurrence well above both nmax and the turning
  // point n ~ |x|, where J_n has decayed enough for Miller normalization.
  int start = nmax + 16 + static_cast<int>(1.3 * ax);
  if (start % 2) ++start;

  double jp = 0.0;        // J_{n+1}
  double jc = 1e-300;     // J_n (arbitrary seed, rescaled away)
  double norm = 0.0;      // accumulates J_0 + 2 sum_{k>=1} J_{2k}
  for (int n = start; n >= 1; --n) {
    double jm = (2.0 * n / ax) * jc - jp;
    jp = jc;
    jc = jm;
    if (!(n & 1)) norm += 2.0 * jp;
    if (std::fabs(jc) > 1e250) {
      jc *= 1e-250;
      jp *= 1e-250;
      norm *= 1e-250;
      for (auto& v : out) v *= 1e-250;
    }
    if (n - 1 <= nmax) out[n - 1] = jc;
    if (n <= nmax) out[n] = jp;
  }
  norm += jc;
  for (auto& v : out) v /= norm;

  if (x < 0.0) {
    for (int n = 1; n <= nmax; n += 2) out[n] = -out[n];
  }
  return out;
}

double bessel_j(int n, double x) {
  int a = std::abs(n);
  double v = bessel_j_ladder(a, x)[a];
  return (n < 0 && (a & 1)) ? -v : v;
}

}  // namespace felpair
