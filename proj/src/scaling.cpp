#include "felpair/scaling.hpp"

#include <cmath>

#include "felpair/errors.hpp"

namespace felpair {

PowerLawFit fit_power_law(const std::vector<double>& x,
                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ContractError("fit_power_law needs >= 2 paired points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ContractError("fit_power_law requires strictly positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double denom = n * sxx - sx * sx;
  PowerLawFit fit;
  if (denom == 0.0) {
    // Degenerate abscissa: constant series convention, slope 0.
    fit.exponent = 0.0;
    fit.intercept = sy / n;
  } else {
    fit.exponent = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / n;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

ScalingSeries scan_u_pair(const FelParameters& base, double gamma_tan_z,
                          const std::vector<double>& scale_factors,
                          bool vary_field, const FloquetSettings& floquet) {
  if (scale_factors.size() < 2)
    throw ContractError("scan_u_pair needs at least two scale factors");
  ScalingSeries series;
  series.gamma_tan_z = gamma_tan_z;
  series.vary_field = vary_field;

  for (double f : scale_factors) {
    if (!(f > 0.0)) throw ContractError("scale factors must be positive");
    FelParameters p = base;
    if (vary_field) {
      p.undulator_peak_field_t *= f;
    } else {
      p.undulator_period_length_m *= f;
    }
    // The fundamental moves with K; the configured cross-check value only
    // applies to the nominal machine.
    p.fundamental_wavelength_m.reset();
    DerivedBeamQuantities dbq = derive_beam_quantities(p);
    RateCalculator calc(dbq, floquet);
    auto res = calc.u_pair(gamma_tan_z);

    ScalingPoint point;
    point.b0_t = p.undulator_peak_field_t;
    point.lambda_u_m = p.undulator_period_length_m;
    point.b0_lambda_u = point.b0_t * point.lambda_u_m;
    point.undulator_parameter = dbq.undulator_parameter;
    point.u_pair = res.u_pair;
    point.q_value = res.m2;
    series.points.push_back(point);
  }

  std::vector<double> xs, qs, us;
  for (const auto& pt : series.points) {
    xs.push_back(pt.b0_lambda_u);
    qs.push_back(pt.q_value);
    us.push_back(pt.u_pair);
  }
  series.q_fit = fit_power_law(xs, qs);
  series.u_pair_fit = fit_power_law(xs, us);
  return series;
}

}  // namespace felpair
