#include "felpair/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

namespace {
constexpr const char* kToolVersion = "0.1.0";

std::string iso_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}
}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["timestamp"] = timestamp;
  j["workers"] = workers;
  j["floquet"] = {{"initial_order", floquet.initial_order},
                  {"relative_tolerance", floquet.relative_tolerance},
                  {"max_order", floquet.max_order},
                  {"resonance_guard", floquet.resonance_guard}};
  j["quadrature"] = {{"relative_tolerance", quadrature.relative_tolerance},
                     {"max_regions", quadrature.max_regions}};
  j["unit_constants"] = {
      {"electron_mass_ev", constants::electron_mass_ev},
      {"fine_structure", constants::fine_structure},
      {"hbar_c_ev_m", constants::hbar_c_ev_m},
      {"hbar_ev_s", constants::hbar_ev_s},
      {"elementary_charge_c", constants::elementary_charge_c},
      {"electron_mass_kg", constants::electron_mass_kg},
      {"speed_of_light_m_s", constants::speed_of_light_m_s}};
  return j;
}

RunManifest make_manifest(const Config& config, int workers) {
  RunManifest m;
  m.tool_version = kToolVersion;
  m.config_hash = config_hash(config);
  m.timestamp = iso_timestamp();
  m.workers = workers;
  m.floquet = config.floquet;
  m.quadrature = config.quadrature;
  return m;
}

SweepRunner::SweepRunner(const Config& config, int workers)
    : config_(config),
      workers_(workers > 0 ? workers : 1),
      dbq_(derive_beam_quantities(config.fel)),
      calc_(dbq_, config.floquet) {
  source_ = [this](const PairKinematics& kin) {
    return calc_.engine().helicity_block(kin);
  };
}

std::vector<std::vector<double>> SweepRunner::grid_axes() const {
  std::vector<std::vector<double>> axes;
  for (const auto& axis : config_.sweep.axes) {
    if (axis.count < 1)
      throw ConfigError("sweep axis '" + axis.name + "' needs count >= 1");
    std::vector<double> values;
    if (axis.count == 1) {
      values.push_back(axis.min);
    } else if (axis.spacing == "log") {
      if (!(axis.min > 0.0) || !(axis.max > 0.0))
        throw ConfigError("log axis '" + axis.name + "' needs positive range");
      double l0 = std::log(axis.min), l1 = std::log(axis.max);
      for (int i = 0; i < axis.count; ++i)
        values.push_back(std::exp(l0 + (l1 - l0) * i / (axis.count - 1)));
    } else if (axis.spacing == "linear") {
      for (int i = 0; i < axis.count; ++i)
        values.push_back(axis.min +
                         (axis.max - axis.min) * i / (axis.count - 1));
    } else {
      throw ConfigError("sweep axis '" + axis.name +
                        "': spacing must be 'linear' or 'log'");
    }
    axes.push_back(std::move(values));
  }
  return axes;
}

SweepPoint SweepRunner::evaluate_point(
    const std::map<std::string, double>& values) const {
  static const std::vector<std::string> known = {
      "Z1", "Z2", "A2_minus_A1", "k1_energy", "B0_lambda_u"};
  for (const auto& [key, v] : values) {
    (void)v;
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw ConfigError("unknown sweep variable '" + key + "'");
  }

  auto get = [&](const std::string& key) -> std::optional<double> {
    auto it = values.find(key);
    if (it != values.end()) return it->second;
    return std::nullopt;
  };

  // B0*lambda_u overrides rebuild the machine at fixed lambda_u.
  const DerivedBeamQuantities* dbq = &dbq_;
  std::optional<DerivedBeamQuantities> scaled_dbq;
  std::optional<RateCalculator> scaled_calc;
  const RateCalculator* calc = &calc_;
  if (auto bl = get("B0_lambda_u")) {
    FelParameters p = config_.fel;
    p.undulator_peak_field_t = *bl / p.undulator_period_length_m;
    p.fundamental_wavelength_m.reset();
    scaled_dbq = derive_beam_quantities(p);
    scaled_calc.emplace(*scaled_dbq, config_.floquet);
    dbq = &*scaled_dbq;
    calc = &*scaled_calc;
  }

  SweepPoint point;
  auto z1v = get("Z1");
  auto z2v = get("Z2");
  if (!z1v || !z2v)
    throw ConfigError("sweep needs Z1 and Z2 (axis or fixed value)");
  double da = get("A2_minus_A1").value_or(0.0);

  double k1_lab = 0.0;
  if (config_.sweep.frame == Frame::Lab) {
    point.z1_lab = std::atan(*z1v / dbq->gamma);
    point.z2_lab = std::atan(*z2v / dbq->gamma);
    point.z1_ef = zenith_angle_ef(point.z1_lab, *dbq);
    point.z2_ef = zenith_angle_ef(point.z2_lab, *dbq);
    k1_lab = get("k1_energy").value_or(dbq->fundamental_energy / 3.0);
    point.k1_ef = photon_energy_ef(k1_lab, point.z1_lab, *dbq);
  } else {
    point.z1_ef = *z1v;
    point.z2_ef = *z2v;
    point.z1_lab = zenith_angle_lab(point.z1_ef, *dbq);
    point.z2_lab = zenith_angle_lab(point.z2_ef, *dbq);
    auto k1 = get("k1_energy");
    if (!k1)
      throw ConfigError("ef-frame sweep needs k1_energy (axis or fixed value)");
    point.k1_ef = *k1;
  }
  point.a1 = 0.0;
  point.a2 = da;
  point.gamma_tan_z1 = dbq->gamma * std::tan(point.z1_lab);
  point.gamma_tan_z2 = dbq->gamma * std::tan(point.z2_lab);

  const auto& outputs = config_.sweep.outputs;
  auto wants = [&](const char* name) {
    for (const auto& o : outputs)
      if (o == name) return true;
    return false;
  };
  bool needs_block = wants("rate") || wants("concurrence") ||
                     wants("density_matrix") || wants("collective_rate");

  point.sample.k1_energy = point.k1_ef;
  point.sample.angles = {point.z1_ef, point.a1, point.z2_ef, point.a2,
                         Frame::ElectronFrame};

  if (needs_block) {
    try {
      PairKinematics kin = pair_kinematics(
          point.n, unit_from_spherical(point.z1_ef, point.a1), point.k1_ef,
          unit_from_spherical(point.z2_ef, point.a2), *dbq);
      HelicityAmplitudeBlock block = source_(kin);
      point.sample = rate_from_block(block, *dbq);
      point.sample.angles = {point.z1_ef, point.a1, point.z2_ef, point.a2,
                             Frame::ElectronFrame};
      if (wants("concurrence") || wants("density_matrix")) {
        try {
          TwoPhotonDensityMatrix rho = density_matrix(block);
          point.concurrence = concurrence(rho);
          point.concurrence_defined = point.sample.rate > 0.0;
          if (wants("density_matrix")) point.state = rho;
        } catch (const UndefinedStateError&) {
          point.concurrence_defined = false;
        }
      }
    } catch (const ChannelClosedError&) {
      point.sample.rate = 0.0;
      point.sample.channel_open = false;
      point.sample.rate_by_channel[point.n] = 0.0;
      point.concurrence_defined = false;
    }
  }

  if (wants("f_mb") || wants("collective_rate")) {
    MicrobunchProfile profile = config_.microbunch_profile(*dbq);
    point.f_mb_value =
        f_mb(profile, point.z1_ef, point.z2_ef, point.k1_ef, *dbq);
    if (wants("collective_rate"))
      point.collective = point.sample.rate * *point.f_mb_value;
  }
  (void)calc;
  return point;
}

std::vector<SweepPoint> SweepRunner::run() const {
  auto axes = grid_axes();
  const auto& axis_defs = config_.sweep.axes;
  // Duplicate axis names would make the grid ambiguous.
  for (std::size_t i = 0; i < axis_defs.size(); ++i)
    for (std::size_t j = i + 1; j < axis_defs.size(); ++j)
      if (axis_defs[i].name == axis_defs[j].name)
        throw ConfigError("duplicate sweep axis '" + axis_defs[i].name + "'");

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  const auto& channels = config_.detector.n_channels;
  std::size_t n_points = total * channels.size();

  std::vector<SweepPoint> results(n_points);
  std::vector<std::exception_ptr> errors(n_points);
  std::atomic<std::size_t> cursor{0};

  auto work = [&]() {
    while (true) {
      std::size_t idx = cursor.fetch_add(1);
      if (idx >= n_points) break;
      std::size_t grid_idx = idx / channels.size();
      int n = channels[idx % channels.size()];
      std::map<std::string, double> values = config_.sweep.fixed;
      std::vector<double> axis_values;
      std::size_t rem = grid_idx;
      for (std::size_t a = axes.size(); a-- > 0;) {
        std::size_t i = rem % axes[a].size();
        rem /= axes[a].size();
        values[axis_defs[a].name] = axes[a][i];
      }
      for (std::size_t a = 0; a < axes.size(); ++a)
        axis_values.push_back(values[axis_defs[a].name]);
      try {
        SweepPoint p = evaluate_point(values);
        p.n = n;
        p.axis_values = axis_values;
        results[idx] = std::move(p);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };

  if (workers_ <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers_; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n_points; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
  return results;
}

RateSample rate_from_block(const HelicityAmplitudeBlock& block,
                           const DerivedBeamQuantities& dbq) {
  const PairKinematics& kin = block.kinematics;
  RateSample sample;
  sample.k1_energy = kin.k1.t;
  double two_pi_5 = std::pow(2.0 * constants::pi, 5);
  double m2 = block.helicity_summed_m2();
  double prefactor =
      kin.k1.t * kin.k2.t * kin.k2.t /
      (two_pi_5 * 16.0 * dbq.electron_quasimomentum.t *
       std::fabs(kin.de_denominator));
  sample.rate = prefactor * m2;
  sample.m2_total = m2;
  sample.rate_by_channel[kin.n] = sample.rate;
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 2; ++i2)
      sample.helicity_channel_m2[static_cast<std::size_t>(2 * i1 + i2)] =
          block.channel_m2(i1, i2);
  sample.channel_open = true;
  auto angles_of = [](const FourVector& v) {
    double zen = std::atan2(std::hypot(v.x, v.y), v.z);
    double az = (v.x == 0.0 && v.y == 0.0) ? 0.0 : std::atan2(v.y, v.x);
    return std::pair<double, double>{zen, az};
  };
  auto [z1, a1] = angles_of(kin.k1);
  auto [z2, a2] = angles_of(kin.k2);
  sample.angles = {z1, a1, z2, a2, Frame::ElectronFrame};
  return sample;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& points,
                     const SweepConfig& sweep) {
  auto wants = [&](const char* name) {
    for (const auto& o : sweep.outputs)
      if (o == name) return true;
    return false;
  };

  double max_rate = 0.0;
  for (const auto& p : points) max_rate = std::max(max_rate, p.sample.rate);

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path, 2);

  out << "n,k1_eV,Z1,A1,Z2,A2,frame,rate,m2_pp,m2_pm,m2_mp,m2_mm";
  if (wants("rate") && sweep.normalize) out << ",rate_normalized";
  if (wants("concurrence")) out << ",concurrence,concurrence_defined";
  if (wants("f_mb")) out << ",f_mb";
  if (wants("collective_rate")) out << ",collective_rate";
  bool lab = sweep.frame == Frame::Lab;
  if (lab) out << ",gamma_tan_z1,gamma_tan_z2";
  out << "\n";

  for (const auto& p : points) {
    double z1 = lab ? p.z1_lab : p.z1_ef;
    double z2 = lab ? p.z2_lab : p.z2_ef;
    out << p.n << "," << format_double(p.sample.k1_energy) << ","
        << format_double(z1) << "," << format_double(p.a1) << ","
        << format_double(z2) << "," << format_double(p.a2) << ","
        << (lab ? "lab" : "ef") << "," << format_double(p.sample.rate);
    for (double v : p.sample.helicity_channel_m2) out << "," << format_double(v);
    if (wants("rate") && sweep.normalize)
      out << ","
          << format_double(max_rate > 0.0 ? p.sample.rate / max_rate : 0.0);
    if (wants("concurrence"))
      out << "," << format_double(p.concurrence.value_or(0.0)) << ","
          << (p.concurrence_defined ? 1 : 0);
    if (wants("f_mb")) out << "," << format_double(p.f_mb_value.value_or(0.0));
    if (wants("collective_rate"))
      out << "," << format_double(p.collective.value_or(0.0));
    if (lab)
      out << "," << format_double(p.gamma_tan_z1) << ","
          << format_double(p.gamma_tan_z2);
    out << "\n";
  }
}

void write_sweep_summary(const std::string& path, const RunManifest& manifest,
                         const SweepConfig& sweep,
                         const std::vector<SweepPoint>& points) {
  nlohmann::json j;
  j["manifest"] = manifest.to_json();
  j["frame"] = sweep.frame == Frame::Lab ? "lab" : "ef";
  j["outputs"] = sweep.outputs;
  j["points"] = points.size();
  double max_rate = 0.0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].sample.rate > max_rate) {
      max_rate = points[i].sample.rate;
      argmax = i;
    }
  }
  j["max_rate"] = max_rate;
  j["normalization"] = "global_max";
  if (!points.empty()) {
    j["max_rate_point"] = {{"index", argmax},
                           {"axis_values", points[argmax].axis_values}};
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path, 2);
  out << j.dump(2) << "\n";
}

namespace {
nlohmann::json matrix_json(const Matrix4c& m, bool imaginary) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j)
      row.push_back(imaginary ? m(i, j).imag() : m(i, j).real());
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json report_json(const EntanglementReport& rep) {
  return {{"concurrence", rep.concurrence},
          {"negativity", rep.negativity},
          {"entanglement_of_formation", rep.entanglement_of_formation},
          {"q_eigenvalues", rep.q_eigenvalues},
          {"basis", rep.basis}};
}

nlohmann::json four_vector_json(const FourVector& v) {
  return {v.t, v.x, v.y, v.z};
}
}  // namespace

void write_density_matrix_json(const std::string& path,
                               const RunManifest& manifest,
                               const TwoPhotonDensityMatrix& state,
                               const EntanglementReport& report_helicity,
                               const TwoPhotonDensityMatrix& linear,
                               const EntanglementReport& report_linear,
                               double mean_rate) {
  nlohmann::json j;
  j["manifest"] = manifest.to_json();
  j["kinematics"] = {{"n", state.kinematics.n},
                     {"k1", four_vector_json(state.kinematics.k1)},
                     {"k2", four_vector_json(state.kinematics.k2)},
                     {"frame", "ef"}};
  j["helicity"] = {{"basis", state.basis},
                   {"rho_re", matrix_json(state.rho, false)},
                   {"rho_im", matrix_json(state.rho, true)},
                   {"report", report_json(report_helicity)}};
  j["linear"] = {{"basis", linear.basis},
                 {"rho_re", matrix_json(linear.rho, false)},
                 {"rho_im", matrix_json(linear.rho, true)},
                 {"report", report_json(report_linear)}};
  j["mean_rate"] = mean_rate;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path, 2);
  out << j.dump(2) << "\n";
}

void write_pair_rates_json(const std::string& path, const RunManifest& manifest,
                           double r_se, double r_sync, double r_fel,
                           double enhancement_ratio, double f_mb_value,
                           long long n_e, long long n_i) {
  nlohmann::json j;
  j["manifest"] = manifest.to_json();
  j["r_se"] = r_se;
  j["r_sync"] = r_sync;
  j["r_fel"] = r_fel;
  j["enhancement_ratio"] = enhancement_ratio;
  j["f_mb"] = f_mb_value;
  j["n_e"] = n_e;
  j["n_i"] = n_i;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path, 2);
  out << j.dump(2) << "\n";
}

}  // namespace felpair
