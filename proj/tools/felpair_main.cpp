// Command-line front end: one subcommand per simulation artifact.
//
// Exit codes: 0 success, 2 configuration error, 3 physics-domain error
// (closed channel, resonance), 4 convergence failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "felpair/config.hpp"
#include "felpair/constants.hpp"
#include "felpair/errors.hpp"
#include "felpair/microbunch.hpp"
#include "felpair/scaling.hpp"
#include "felpair/sweep.hpp"

namespace {

using namespace felpair;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  int workers = 1;
  double tolerance = 0.0;  // 0: keep config value
};

Config load_config(const GlobalOptions& g) {
  Config cfg = Config::from_file(g.config_path);
  if (g.tolerance > 0.0) cfg.quadrature.relative_tolerance = g.tolerance;
  cfg.quadrature.workers = g.workers;
  return cfg;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

std::vector<std::string> merge_outputs(std::vector<std::string> base,
                                       const std::vector<std::string>& extra) {
  for (const auto& o : extra) {
    bool seen = false;
    for (const auto& b : base) seen = seen || b == o;
    if (!seen) base.push_back(o);
  }
  return base;
}

int run_map(const GlobalOptions& g, const std::vector<std::string>& outputs,
            const std::string& stem) {
  Config cfg = load_config(g);
  cfg.sweep.outputs = merge_outputs(outputs, cfg.sweep.outputs);
  SweepRunner runner(cfg, g.workers);
  auto points = runner.run();
  RunManifest manifest = make_manifest(cfg, g.workers);
  write_sweep_csv(out_path(g, stem + ".csv"), points, cfg.sweep);
  write_sweep_summary(out_path(g, stem + ".json"), manifest, cfg.sweep, points);
  std::cout << stem << ": " << points.size() << " points -> " << g.out_dir
            << "\n";
  return 0;
}

int run_density_matrix(const GlobalOptions& g, double gamma_tan_z_override) {
  Config cfg = load_config(g);
  if (gamma_tan_z_override > 0.0) {
    cfg.detector.aperture.gamma_tan_z = gamma_tan_z_override;
    cfg.detector.aperture.zenith_rad.reset();
  }
  DerivedBeamQuantities dbq = derive_beam_quantities(cfg.fel);
  RateCalculator calc(dbq, cfg.floquet);
  DetectorWindow window = cfg.detector.resolve(dbq);
  double k1_lab = cfg.density_matrix_k1_fraction * dbq.fundamental_energy;
  auto avg = calc.aperture_density_matrix(window, k1_lab,
                                          window.n_channels.front(),
                                          cfg.quadrature);
  auto linear = to_linear_basis(avg.state);
  auto report_linear = entanglement_report(linear);
  RunManifest manifest = make_manifest(cfg, g.workers);
  write_density_matrix_json(out_path(g, "density_matrix.json"), manifest,
                            avg.state, avg.report, linear, report_linear,
                            avg.mean_rate);
  std::cout << "density-matrix: C = " << avg.report.concurrence << " -> "
            << g.out_dir << "\n";
  return 0;
}

int run_pair_rates(const GlobalOptions& g) {
  Config cfg = load_config(g);
  DerivedBeamQuantities dbq = derive_beam_quantities(cfg.fel);
  RateCalculator calc(dbq, cfg.floquet);
  DetectorWindow window = cfg.detector.resolve(dbq);
  double r_se = calc.pair_rate_through_detector(window, cfg.quadrature);

  MicrobunchProfile profile = cfg.microbunch_profile(dbq);
  long long n_e = dbq.electrons_per_pulse;
  long long n_i = profile.coherent_sections();
  // Headline collective rate at the quasi-phase-matched point (delta phi =
  // 2 pi n): |H|^2 = (sum N_j)^2. The angle-dependent F_MB is what the
  // microbunch-map command exports.
  double h2 = profile.section_population() * profile.section_population();
  double f_mb_matched = h2 * static_cast<double>(n_i);
  double r_sync = static_cast<double>(n_e) * r_se;
  double r_fel = r_se * f_mb_matched;
  double ratio = r_fel / r_sync;

  RunManifest manifest = make_manifest(cfg, g.workers);
  write_pair_rates_json(out_path(g, "pair_rates.json"), manifest, r_se, r_sync,
                        r_fel, ratio, f_mb_matched, n_e, n_i);
  std::printf("pair-rates: R_SE = %.3e, R_Sync = %.3e, R_FEL = %.3e (x%.1e)\n",
              r_se, r_sync, r_fel, ratio);
  return 0;
}

int run_scaling(const GlobalOptions& g) {
  Config cfg = load_config(g);
  if (cfg.scaling.probes.empty())
    throw ConfigError("scaling: probe list must not be empty");
  if (cfg.scaling.points < 2)
    throw ConfigError("scaling: needs at least two points per probe");

  std::vector<double> factors;
  double half = std::sqrt(cfg.scaling.span);
  for (int i = 0; i < cfg.scaling.points; ++i) {
    double t = static_cast<double>(i) / (cfg.scaling.points - 1);
    factors.push_back(half * std::pow(1.0 / cfg.scaling.span, 1.0 - t));
  }

  std::ofstream csv(out_path(g, "scaling.csv"));
  csv << "probe_gamma_tan_z,b0_lambda_u,b0_t,lambda_u_m,undulator_parameter,"
         "u_pair,q_value\n";
  nlohmann::json summary;
  summary["manifest"] = make_manifest(cfg, g.workers).to_json();
  summary["probes"] = nlohmann::json::array();

  for (double probe : cfg.scaling.probes) {
    ScalingSeries series = scan_u_pair(cfg.fel, probe, factors,
                                       cfg.scaling.vary_field, cfg.floquet);
    for (const auto& pt : series.points) {
      csv << format_double(probe) << "," << format_double(pt.b0_lambda_u) << ","
          << format_double(pt.b0_t) << "," << format_double(pt.lambda_u_m)
          << "," << format_double(pt.undulator_parameter) << ","
          << format_double(pt.u_pair) << "," << format_double(pt.q_value)
          << "\n";
    }
    summary["probes"].push_back(
        {{"gamma_tan_z", probe},
         {"exponent", series.q_fit.exponent},
         {"residual", series.q_fit.rms_residual},
         {"u_pair_exponent", series.u_pair_fit.exponent},
         {"vary", series.vary_field ? "field" : "period"}});
    std::printf("scaling: probe %.2f -> exponent %.3f\n", probe,
                series.q_fit.exponent);
  }
  std::ofstream js(out_path(g, "scaling.json"));
  js << summary.dump(2) << "\n";
  return 0;
}

int run_microbunch_map(const GlobalOptions& g) {
  Config cfg = load_config(g);
  DerivedBeamQuantities dbq = derive_beam_quantities(cfg.fel);
  MicrobunchProfile profile = cfg.microbunch_profile(dbq);

  SweepRunner runner(cfg, g.workers);
  cfg.sweep.outputs = {"f_mb"};
  SweepRunner runner2(cfg, g.workers);
  auto points = runner2.run();

  std::ofstream csv(out_path(g, "microbunch_map.csv"));
  csv << "z1_ef,z2_ef,k1_eV,delta_phi,h_re,h_im,h_abs2,f_mb\n";
  for (const auto& p : points) {
    double dphi = phase_difference(p.z1_ef, p.z2_ef, p.k1_ef, dbq);
    auto h = enhancement_h(profile, dphi);
    csv << format_double(p.z1_ef) << "," << format_double(p.z2_ef) << ","
        << format_double(p.k1_ef) << "," << format_double(dphi) << ","
        << format_double(h.real()) << "," << format_double(h.imag()) << ","
        << format_double(std::norm(h)) << ","
        << format_double(p.f_mb_value.value_or(0.0)) << "\n";
  }
  nlohmann::json j;
  j["manifest"] = make_manifest(cfg, g.workers).to_json();
  j["points"] = points.size();
  j["delta_l_m"] = bunch_displacement_m(dbq);
  j["n_i"] = profile.coherent_sections();
  std::ofstream js(out_path(g, "microbunch_map.json"));
  js << j.dump(2) << "\n";
  std::cout << "microbunch-map: " << points.size() << " points -> "
            << g.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled X-ray photon-pair emission simulator for FEL "
               "undulators"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON configuration file")
      ->required();
  app.add_option("--out", g.out_dir, "output directory")->required();
  app.add_option("--workers", g.workers, "worker threads (default 1)");
  app.add_option("--tolerance", g.tolerance,
                 "relative quadrature tolerance override");

  auto* rate_map = app.add_subcommand("rate-map",
                                      "differential-rate grid over the sweep "
                                      "axes");
  auto* conc_map = app.add_subcommand("concurrence-map",
                                      "concurrence grid over the sweep axes");
  auto* dm = app.add_subcommand("density-matrix",
                                "aperture-averaged two-photon density matrix");
  double gamma_tan_z = 0.0;
  dm->add_option("--gamma-tan-z", gamma_tan_z,
                 "override the aperture position gamma*tan(Z)");
  auto* rates = app.add_subcommand("pair-rates",
                                   "R_SE, R_Sync, R_FEL through the detector");
  auto* scaling = app.add_subcommand("scaling",
                                     "U_pair power-law scan in B0*lambda_u");
  auto* mb = app.add_subcommand("microbunch-map",
                                "phase slip and enhancement factor grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rate_map->parsed()) return run_map(g, {"rate"}, "rate_map");
    if (conc_map->parsed())
      return run_map(g, {"rate", "concurrence"}, "concurrence_map");
    if (dm->parsed()) return run_density_matrix(g, gamma_tan_z);
    if (rates->parsed()) return run_pair_rates(g);
    if (scaling->parsed()) return run_scaling(g);
    if (mb->parsed()) return run_microbunch_map(g);
  } catch (const felpair::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
