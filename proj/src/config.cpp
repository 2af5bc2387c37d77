#include "felpair/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError("config error at " + where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("config error at " + where + ": unknown key '" +
                        it.key() + "'");
  }
}

double require_number(const json& j, const std::string& where,
                      const char* key) {
  if (!j.contains(key))
    throw ConfigError("config error at " + where + ": missing key '" + key +
                      "'");
  if (!j[key].is_number())
    throw ConfigError("config error at " + where + "/" + key +
                      ": expected a number");
  return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<double>();
}

}  // namespace

std::array<double, 2> EnergyWindowConfig::resolve(
    const DerivedBeamQuantities& dbq) const {
  if (range_ev) {
    if (!((*range_ev)[1] >= (*range_ev)[0]))
      throw ConfigError("energy window must be ordered [lo, hi]");
    return *range_ev;
  }
  if (!(fraction_of_fundamental > 0.0) || !(width_ev > 0.0))
    throw ConfigError(
        "energy window needs either range_ev or fraction_of_fundamental with "
        "width_ev");
  double hi = fraction_of_fundamental * dbq.fundamental_energy;
  return {hi - width_ev, hi};
}

double ApertureConfig::resolve_zenith(const DerivedBeamQuantities& dbq) const {
  if (zenith_rad && gamma_tan_z)
    throw ConfigError("aperture: give either zenith_rad or gamma_tan_z");
  if (zenith_rad) return *zenith_rad;
  if (gamma_tan_z) return std::atan(*gamma_tan_z / dbq.gamma);
  throw ConfigError("aperture: position missing");
}

double ApertureConfig::resolve_radius(const DerivedBeamQuantities& dbq) const {
  if (radius_rad && radius_gamma_tan)
    throw ConfigError("aperture: give either radius_rad or radius_gamma_tan");
  if (radius_rad) return *radius_rad;
  if (radius_gamma_tan) return *radius_gamma_tan / dbq.gamma;
  throw ConfigError("aperture: radius missing");
}

DetectorWindow DetectorConfig::resolve(const DerivedBeamQuantities& dbq) const {
  DetectorWindow w;
  w.photon1_window_ev = photon1_window.resolve(dbq);
  w.photon2_window_ev = photon2_window.resolve(dbq);
  w.aperture_zenith = aperture.resolve_zenith(dbq);
  w.aperture_azimuth = aperture.azimuth;
  w.aperture_radius = aperture.resolve_radius(dbq);
  w.n_channels = n_channels;
  if (w.n_channels.empty())
    throw ConfigError("detector: n_channels must not be empty");
  for (int n : w.n_channels)
    if (n < 1) throw ConfigError("detector: n_channels entries must be >= 1");
  return w;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

Config Config::from_json(const json& j) {
  check_keys(j, "/",
             {"fel", "microbunch", "detector", "floquet", "quadrature",
              "sweep", "scaling", "density_matrix_k1_fraction"});
  Config cfg;

  if (!j.contains("fel"))
    throw ConfigError("config error at /: missing key 'fel'");
  const json& f = j["fel"];
  check_keys(f, "/fel",
             {"electron_energy", "charge_per_pulse", "peak_current",
              "repetition_rate", "undulator_peak_field",
              "undulator_period_length", "undulator_period_number",
              "pierce_parameter", "fundamental_wavelength",
              "saturation_peak_power", "emission_pulse_fwhm"});
  cfg.fel.electron_energy_ev = require_number(f, "/fel", "electron_energy");
  cfg.fel.charge_per_pulse_c = require_number(f, "/fel", "charge_per_pulse");
  cfg.fel.peak_current_a = require_number(f, "/fel", "peak_current");
  cfg.fel.repetition_rate_hz = require_number(f, "/fel", "repetition_rate");
  cfg.fel.undulator_peak_field_t =
      require_number(f, "/fel", "undulator_peak_field");
  cfg.fel.undulator_period_length_m =
      require_number(f, "/fel", "undulator_period_length");
  cfg.fel.undulator_period_number =
      static_cast<int>(require_number(f, "/fel", "undulator_period_number"));
  cfg.fel.pierce_parameter = require_number(f, "/fel", "pierce_parameter");
  if (f.contains("fundamental_wavelength"))
    cfg.fel.fundamental_wavelength_m = f["fundamental_wavelength"].get<double>();
  if (f.contains("saturation_peak_power"))
    cfg.fel.saturation_peak_power_w = f["saturation_peak_power"].get<double>();
  if (f.contains("emission_pulse_fwhm"))
    cfg.fel.emission_pulse_fwhm_s = f["emission_pulse_fwhm"].get<double>();

  if (j.contains("microbunch")) {
    const json& m = j["microbunch"];
    check_keys(m, "/microbunch",
               {"coherent_bunch_count", "electrons_per_bunch",
                "bunch_populations"});
    cfg.microbunch.coherent_bunch_count = static_cast<int>(
        number_or(m, "coherent_bunch_count", cfg.microbunch.coherent_bunch_count));
    cfg.microbunch.electrons_per_bunch =
        number_or(m, "electrons_per_bunch", cfg.microbunch.electrons_per_bunch);
    if (m.contains("bunch_populations"))
      cfg.microbunch.bunch_populations =
          m["bunch_populations"].get<std::vector<double>>();
  }

  if (j.contains("detector")) {
    const json& d = j["detector"];
    check_keys(d, "/detector",
               {"aperture", "photon1_window", "photon2_window", "n_channels"});
    if (d.contains("aperture")) {
      const json& a = d["aperture"];
      check_keys(a, "/detector/aperture",
                 {"gamma_tan_z", "zenith_rad", "azimuth", "radius_gamma_tan",
                  "radius_rad"});
      if (a.contains("gamma_tan_z"))
        cfg.detector.aperture.gamma_tan_z = a["gamma_tan_z"].get<double>();
      if (a.contains("zenith_rad"))
        cfg.detector.aperture.zenith_rad = a["zenith_rad"].get<double>();
      cfg.detector.aperture.azimuth = number_or(a, "azimuth", 0.0);
      if (a.contains("radius_gamma_tan"))
        cfg.detector.aperture.radius_gamma_tan =
            a["radius_gamma_tan"].get<double>();
      if (a.contains("radius_rad"))
        cfg.detector.aperture.radius_rad = a["radius_rad"].get<double>();
    }
    auto parse_window = [](const json& w, const std::string& where) {
      check_keys(w, where, {"range_ev", "fraction_of_fundamental", "width_ev"});
      EnergyWindowConfig cfg_w;
      if (w.contains("range_ev")) {
        auto v = w["range_ev"].get<std::vector<double>>();
        if (v.size() != 2)
          throw ConfigError("config error at " + where +
                            "/range_ev: expected [lo, hi]");
        cfg_w.range_ev = std::array<double, 2>{v[0], v[1]};
      }
      cfg_w.fraction_of_fundamental = number_or(w, "fraction_of_fundamental", 0.0);
      cfg_w.width_ev = number_or(w, "width_ev", 0.0);
      return cfg_w;
    };
    if (d.contains("photon1_window"))
      cfg.detector.photon1_window =
          parse_window(d["photon1_window"], "/detector/photon1_window");
    if (d.contains("photon2_window"))
      cfg.detector.photon2_window =
          parse_window(d["photon2_window"], "/detector/photon2_window");
    if (d.contains("n_channels"))
      cfg.detector.n_channels = d["n_channels"].get<std::vector<int>>();
  }

  if (j.contains("floquet")) {
    const json& q = j["floquet"];
    check_keys(q, "/floquet",
               {"initial_order", "relative_tolerance", "max_order",
                "resonance_guard"});
    cfg.floquet.initial_order =
        static_cast<int>(number_or(q, "initial_order", cfg.floquet.initial_order));
    cfg.floquet.relative_tolerance =
        number_or(q, "relative_tolerance", cfg.floquet.relative_tolerance);
    cfg.floquet.max_order =
        static_cast<int>(number_or(q, "max_order", cfg.floquet.max_order));
    cfg.floquet.resonance_guard =
        number_or(q, "resonance_guard", cfg.floquet.resonance_guard);
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    check_keys(q, "/quadrature", {"relative_tolerance", "max_regions"});
    cfg.quadrature.relative_tolerance =
        number_or(q, "relative_tolerance", 1e-3);
    cfg.quadrature.max_regions =
        static_cast<int>(number_or(q, "max_regions", cfg.quadrature.max_regions));
  } else {
    cfg.quadrature.relative_tolerance = 1e-3;
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "/sweep", {"axes", "fixed", "frame", "outputs", "normalize"});
    cfg.sweep.axes.clear();
    if (s.contains("axes")) {
      for (std::size_t i = 0; i < s["axes"].size(); ++i) {
        const json& a = s["axes"][i];
        std::string where = "/sweep/axes[" + std::to_string(i) + "]";
        check_keys(a, where, {"name", "min", "max", "count", "spacing"});
        SweepAxis axis;
        axis.name = a.at("name").get<std::string>();
        axis.min = require_number(a, where, "min");
        axis.max = require_number(a, where, "max");
        axis.count = static_cast<int>(number_or(a, "count", 1));
        axis.spacing = a.contains("spacing")
                           ? a["spacing"].get<std::string>()
                           : std::string("linear");
        cfg.sweep.axes.push_back(axis);
      }
    }
    if (s.contains("fixed")) {
      for (auto it = s["fixed"].begin(); it != s["fixed"].end(); ++it)
        cfg.sweep.fixed[it.key()] = it.value().get<double>();
    }
    if (s.contains("frame")) {
      std::string fr = s["frame"].get<std::string>();
      if (fr == "lab")
        cfg.sweep.frame = Frame::Lab;
      else if (fr == "ef")
        cfg.sweep.frame = Frame::ElectronFrame;
      else
        throw ConfigError("config error at /sweep/frame: expected 'lab' or 'ef'");
    }
    if (s.contains("outputs"))
      cfg.sweep.outputs = s["outputs"].get<std::vector<std::string>>();
    if (s.contains("normalize")) cfg.sweep.normalize = s["normalize"].get<bool>();
  }

  if (j.contains("scaling")) {
    const json& s = j["scaling"];
    check_keys(s, "/scaling", {"probes", "points", "span", "vary"});
    if (s.contains("probes"))
      cfg.scaling.probes = s["probes"].get<std::vector<double>>();
    cfg.scaling.points = static_cast<int>(number_or(s, "points", cfg.scaling.points));
    cfg.scaling.span = number_or(s, "span", cfg.scaling.span);
    if (s.contains("vary")) {
      std::string v = s["vary"].get<std::string>();
      if (v == "field")
        cfg.scaling.vary_field = true;
      else if (v == "period")
        cfg.scaling.vary_field = false;
      else
        throw ConfigError(
            "config error at /scaling/vary: expected 'field' or 'period'");
    }
  }

  if (j.contains("density_matrix_k1_fraction"))
    cfg.density_matrix_k1_fraction = j["density_matrix_k1_fraction"].get<double>();

  return cfg;
}

json Config::to_json() const {
  json j;
  json f;
  f["electron_energy"] = fel.electron_energy_ev;
  f["charge_per_pulse"] = fel.charge_per_pulse_c;
  f["peak_current"] = fel.peak_current_a;
  f["repetition_rate"] = fel.repetition_rate_hz;
  f["undulator_peak_field"] = fel.undulator_peak_field_t;
  f["undulator_period_length"] = fel.undulator_period_length_m;
  f["undulator_period_number"] = fel.undulator_period_number;
  f["pierce_parameter"] = fel.pierce_parameter;
  if (fel.fundamental_wavelength_m)
    f["fundamental_wavelength"] = *fel.fundamental_wavelength_m;
  if (fel.saturation_peak_power_w)
    f["saturation_peak_power"] = *fel.saturation_peak_power_w;
  if (fel.emission_pulse_fwhm_s)
    f["emission_pulse_fwhm"] = *fel.emission_pulse_fwhm_s;
  j["fel"] = f;

  json m;
  m["coherent_bunch_count"] = microbunch.coherent_bunch_count;
  m["electrons_per_bunch"] = microbunch.electrons_per_bunch;
  if (microbunch.bunch_populations)
    m["bunch_populations"] = *microbunch.bunch_populations;
  j["microbunch"] = m;

  json d;
  json a;
  if (detector.aperture.gamma_tan_z)
    a["gamma_tan_z"] = *detector.aperture.gamma_tan_z;
  if (detector.aperture.zenith_rad) a["zenith_rad"] = *detector.aperture.zenith_rad;
  a["azimuth"] = detector.aperture.azimuth;
  if (detector.aperture.radius_gamma_tan)
    a["radius_gamma_tan"] = *detector.aperture.radius_gamma_tan;
  if (detector.aperture.radius_rad) a["radius_rad"] = *detector.aperture.radius_rad;
  d["aperture"] = a;
  auto window_json = [](const EnergyWindowConfig& w) {
    json out;
    if (w.range_ev) out["range_ev"] = std::vector<double>{(*w.range_ev)[0], (*w.range_ev)[1]};
    if (w.fraction_of_fundamental > 0.0) {
      out["fraction_of_fundamental"] = w.fraction_of_fundamental;
      out["width_ev"] = w.width_ev;
    }
    return out;
  };
  d["photon1_window"] = window_json(detector.photon1_window);
  d["photon2_window"] = window_json(detector.photon2_window);
  d["n_channels"] = detector.n_channels;
  j["detector"] = d;

  json q;
  q["initial_order"] = floquet.initial_order;
  q["relative_tolerance"] = floquet.relative_tolerance;
  q["max_order"] = floquet.max_order;
  q["resonance_guard"] = floquet.resonance_guard;
  j["floquet"] = q;

  json qu;
  qu["relative_tolerance"] = quadrature.relative_tolerance;
  qu["max_regions"] = quadrature.max_regions;
  j["quadrature"] = qu;

  json s;
  s["axes"] = json::array();
  for (const auto& axis : sweep.axes) {
    json a2;
    a2["name"] = axis.name;
    a2["min"] = axis.min;
    a2["max"] = axis.max;
    a2["count"] = axis.count;
    a2["spacing"] = axis.spacing;
    s["axes"].push_back(a2);
  }
  s["fixed"] = sweep.fixed;
  s["frame"] = sweep.frame == Frame::Lab ? "lab" : "ef";
  s["outputs"] = sweep.outputs;
  s["normalize"] = sweep.normalize;
  j["sweep"] = s;

  json sc;
  sc["probes"] = scaling.probes;
  sc["points"] = scaling.points;
  sc["span"] = scaling.span;
  sc["vary"] = scaling.vary_field ? "field" : "period";
  j["scaling"] = sc;

  j["density_matrix_k1_fraction"] = density_matrix_k1_fraction;
  return j;
}

Config Config::paper_default() {
  Config cfg;
  cfg.fel = FelParameters::lcls();
  cfg.microbunch.coherent_bunch_count = 22;
  cfg.microbunch.electrons_per_bunch = 1.0e6;
  cfg.detector.aperture.gamma_tan_z = 0.60;
  cfg.detector.aperture.radius_gamma_tan = 0.005;
  cfg.detector.photon1_window.fraction_of_fundamental = 1.0 / 3.0;
  cfg.detector.photon1_window.width_ev = 10.0;
  cfg.detector.photon2_window.fraction_of_fundamental = 2.0 / 3.0;
  cfg.detector.photon2_window.width_ev = 10.0;
  cfg.quadrature.relative_tolerance = 1e-3;
  cfg.sweep.fixed = {{"Z1", 0.60}, {"A2_minus_A1", 0.0}};
  cfg.sweep.axes = {{"Z2", 0.01, 1.0, 50, "linear"},
                    {"A2_minus_A1", 0.0, 2.0 * constants::pi, 72, "linear"}};
  return cfg;
}

MicrobunchProfile Config::microbunch_profile(
    const DerivedBeamQuantities& dbq) const {
  MicrobunchProfile p;
  if (microbunch.bunch_populations) {
    p.bunch_populations = *microbunch.bunch_populations;
  } else {
    p.bunch_populations.assign(
        static_cast<std::size_t>(microbunch.coherent_bunch_count),
        microbunch.electrons_per_bunch);
  }
  p.total_electrons = dbq.electrons_per_pulse;
  return p;
}

std::string config_hash(const Config& config) {
  std::string canonical = config.to_json().dump();
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace felpair
