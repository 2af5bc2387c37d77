#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "felpair/config.hpp"
#include "felpair/entanglement.hpp"
#include "felpair/microbunch.hpp"
#include "felpair/rate.hpp"

namespace felpair {

// Provenance block embedded in every JSON summary. The timestamp honors
// SOURCE_DATE_EPOCH for reproducible outputs.
struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::string timestamp;
  int workers = 1;
  FloquetSettings floquet;
  QuadratureOptions quadrature;

  nlohmann::json to_json() const;
};

RunManifest make_manifest(const Config& config, int workers);

// One evaluated grid point of a sweep.
struct SweepPoint {
  std::vector<double> axis_values;  // as given, frame units
  int n = 1;
  // Resolved EF kinematics.
  double z1_ef = 0.0, z2_ef = 0.0, a1 = 0.0, a2 = 0.0, k1_ef = 0.0;
  double z1_lab = 0.0, z2_lab = 0.0;
  double gamma_tan_z1 = 0.0, gamma_tan_z2 = 0.0;
  RateSample sample;
  std::optional<double> concurrence;
  bool concurrence_defined = false;
  std::optional<TwoPhotonDensityMatrix> state;
  std::optional<double> f_mb_value;
  std::optional<double> collective;
};

// Test hook: sweeps resolve amplitudes through this callable so synthetic
// blocks can be injected.
using BlockSource = std::function<HelicityAmplitudeBlock(const PairKinematics&)>;

class SweepRunner {
 public:
  SweepRunner(const Config& config, int workers);

  const DerivedBeamQuantities& beam() const { return dbq_; }

  void set_block_source(BlockSource source) { source_ = std::move(source); }

  // Expands the config sweep axes into the cartesian grid (row-major, last
  // axis fastest) and evaluates every point. Deterministic for any worker
  // count: points are indexed, results merged in index order.
  std::vector<SweepPoint> run() const;

  // Evaluates one fully specified point (used by run() and directly by the
  // single-point reproduction path).
  SweepPoint evaluate_point(const std::map<std::string, double>& values) const;

  std::vector<std::vector<double>> grid_axes() const;

 private:
  Config config_;
  int workers_;
  DerivedBeamQuantities dbq_;
  RateCalculator calc_;
  BlockSource source_;
};

// Free-function form of the rate assembly so sweeps and tests can price a
// block they already hold.
RateSample rate_from_block(const HelicityAmplitudeBlock& block,
                           const DerivedBeamQuantities& dbq);

// Writers. All floating-point fields print with 17 significant digits so
// byte-identity across worker counts is meaningful.
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& points,
                     const SweepConfig& sweep);
void write_sweep_summary(const std::string& path, const RunManifest& manifest,
                         const SweepConfig& sweep,
                         const std::vector<SweepPoint>& points);
void write_density_matrix_json(const std::string& path,
                               const RunManifest& manifest,
                               const TwoPhotonDensityMatrix& state,
                               const EntanglementReport& report_helicity,
                               const TwoPhotonDensityMatrix& linear,
                               const EntanglementReport& report_linear,
                               double mean_rate);
void write_pair_rates_json(const std::string& path, const RunManifest& manifest,
                           double r_se, double r_sync, double r_fel,
                           double enhancement_ratio, double f_mb_value,
                           long long n_e, long long n_i);

std::string format_double(double v);

}  // namespace felpair
