#pragma once

#include <functional>
#include <vector>

namespace felpair {

struct QuadratureOptions {
  double relative_tolerance = 1e-6;
  double absolute_tolerance = 0.0;
  int max_regions = 50000;
  // Threads used to evaluate queued regions. The subdivision schedule is
  // fixed (batches of fixed size, ranked by error with index tie-breaks) and
  // the final sum runs over leaves in creation order with compensated
  // accumulation, so results are bit-identical for any worker count.
  int workers = 1;
};

struct QuadratureOutcome {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
  int regions = 0;
  bool converged = false;
};

struct CubatureOutcome {
  std::vector<double> values;
  double error_estimate = 0.0;
  long evaluations = 0;
  int regions = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7-15 on [a, b].
QuadratureOutcome integrate_1d(const std::function<double(double)>& f,
                               double a, double b,
                               const QuadratureOptions& opt = {});

// Adaptive Genz-Malik degree-7 cubature of a vector-valued integrand over an
// axis-aligned box, dim in [2, 7]. The integrand writes ncomp values for the
// point passed to it.
CubatureOutcome integrate_box(
    const std::function<void(const double* x, double* out)>& f, int dim,
    const std::vector<double>& lower, const std::vector<double>& upper,
    int ncomp, const QuadratureOptions& opt = {});

// Nodes and weights of an n-point Gauss-Legendre rule on [a, b] (n <= 64).
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace felpair
