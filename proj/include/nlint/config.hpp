#pragma once

// JSON run configuration. Keys are lower_snake_case; anything left out falls
// back to the reference scenario. Errors carry a JSON path such as
// "$.sensor.eta".

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "nlint/errors.hpp"
#include "nlint/fringe.hpp"
#include "nlint/physics.hpp"
#include "nlint/spectra.hpp"
#include "nlint/sweep.hpp"

namespace nlint::config {

using json = nlohmann::json;

/// Malformed document: bad JSON, wrong value type or unknown key.
class ConfigParseError : public Error {
 public:
  ConfigParseError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Well-formed document whose values violate a model invariant.
class ConfigValueError : public DomainError {
 public:
  ConfigValueError(const std::string& path, const std::string& what)
      : DomainError(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct MonteCarloSettings {
  int trials = 10000;
  std::uint64_t rng_seed = 42;
};

struct RunConfig {
  physics::SensorConfig sensor;
  physics::DirectConfig direct;
  physics::PlumeState plume;
  spectra::CrossSectionPair sigma_mir = spectra::paper_cross_sections().mir;
  spectra::CrossSectionPair sigma_swir = spectra::paper_cross_sections().swir;
  fringe::FringeScanConfig fringe;
  sweep::SweepSpec sweep;
  MonteCarloSettings monte_carlo;

  sweep::MonteCarloSpec monte_carlo_spec() const {
    return {.sensor = sensor, .plume = plume, .sigma_mir = sigma_mir,
            .trials = monte_carlo.trials, .rng_seed = monte_carlo.rng_seed};
  }
};

namespace detail {

inline std::string child(const std::string& path, std::string_view key) {
  return path + "." + std::string(key);
}

inline void require_object(const json& node, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
  if (!node.is_object()) throw ConfigParseError(path, "expected an object");
  for (const auto& item : node.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigParseError(child(path, item.key()), "unknown key");
  }
}

inline bool read(const json& node, const std::string& path, std::string_view key, double& target) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return false;
  if (!it->is_number()) throw ConfigParseError(child(path, key), "expected a number");
  target = it->get<double>();
  return true;
}

template <typename Int>
inline bool read_int(const json& node, const std::string& path, std::string_view key, Int& target) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return false;
  if (!it->is_number_integer()) throw ConfigParseError(child(path, key), "expected an integer");
  target = it->get<Int>();
  return true;
}

inline void check(bool ok, const std::string& path, std::string_view key, const std::string& what) {
  if (!ok) throw ConfigValueError(child(path, key), what);
}

inline void read_sensor(const json& node, const std::string& path, physics::SensorConfig& s) {
  require_object(node, path, {"eta", "gain", "alpha", "t_int", "p_idler", "lambda_signal", "lambda_idler"});
  read(node, path, "eta", s.eta);
  read(node, path, "gain", s.gain);
  read(node, path, "alpha", s.alpha);
  read(node, path, "t_int", s.t_int);
  read(node, path, "p_idler", s.p_idler);
  read(node, path, "lambda_signal", s.lambda_signal);
  read(node, path, "lambda_idler", s.lambda_idler);
}

inline void read_pair(const json& node, const std::string& path, spectra::CrossSectionPair& p) {
  require_object(node, path, {"sigma_on", "sigma_off", "lambda_on", "lambda_off"});
  read(node, path, "sigma_on", p.sigma_on);
  read(node, path, "sigma_off", p.sigma_off);
  read(node, path, "lambda_on", p.lambda_on);
  read(node, path, "lambda_off", p.lambda_off);
}

inline void validate_sensor(const physics::SensorConfig& s, const std::string& path) {
  check(s.eta > 0.0 && s.eta <= 1.0, path, "eta", "must be in (0, 1]");
  check(s.gain >= 0.0, path, "gain", "must be >= 0");
  check(s.alpha > 0.0 && s.alpha <= 1.0, path, "alpha", "must be in (0, 1]");
  check(s.t_int > 0.0, path, "t_int", "must be > 0 s");
  check(s.p_idler > 0.0, path, "p_idler", "must be > 0 W");
  check(s.lambda_signal > 0.0, path, "lambda_signal", "must be > 0 um");
  check(s.lambda_signal < s.lambda_idler, path, "lambda_idler", "must exceed lambda_signal");
}

inline void validate_pair(const spectra::CrossSectionPair& p, const std::string& path) {
  check(p.sigma_off >= 0.0, path, "sigma_off", "must be >= 0");
  check(p.sigma_on >= p.sigma_off, path, "sigma_on", "must be >= sigma_off");
  check(p.lambda_on > 0.0, path, "lambda_on", "must be > 0 um");
  check(p.lambda_off > 0.0, path, "lambda_off", "must be > 0 um");
}

}  // namespace detail

/// Reads a sweep specification. Missing fields keep the values already in `spec`.
inline void read_sweep_spec(const json& node, sweep::SweepSpec& spec, const std::string& path = "$") {
  using namespace detail;
  require_object(node, path, {"gain_grid", "alpha_values", "base_sensor", "plume_depth", "n_air",
                              "sigma_mir", "sigma_swir"});
  if (auto it = node.find("gain_grid"); it != node.end()) {
    const std::string p = child(path, "gain_grid");
    require_object(*it, p, {"min", "max", "points_per_decade"});
    read(*it, p, "min", spec.gain_grid.min);
    read(*it, p, "max", spec.gain_grid.max);
    read_int(*it, p, "points_per_decade", spec.gain_grid.points_per_decade);
  }
  if (auto it = node.find("alpha_values"); it != node.end()) {
    const std::string p = child(path, "alpha_values");
    if (!it->is_array() || it->empty()) throw ConfigParseError(p, "expected a non-empty array of numbers");
    spec.alpha_values.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) throw ConfigParseError(p + "[" + std::to_string(i) + "]", "expected a number");
      spec.alpha_values.push_back((*it)[i].get<double>());
    }
  }
  if (auto it = node.find("base_sensor"); it != node.end()) read_sensor(*it, child(path, "base_sensor"), spec.base_sensor);
  read(node, path, "plume_depth", spec.plume_depth);
  read(node, path, "n_air", spec.n_air);
  if (auto it = node.find("sigma_mir"); it != node.end()) read_pair(*it, child(path, "sigma_mir"), spec.sigma_mir);
  if (auto it = node.find("sigma_swir"); it != node.end()) read_pair(*it, child(path, "sigma_swir"), spec.sigma_swir);
}

inline void validate_sweep_spec(const sweep::SweepSpec& spec, const std::string& path = "$") {
  using namespace detail;
  const std::string grid = child(path, "gain_grid");
  check(spec.gain_grid.min > 0.0, grid, "min", "must be > 0");
  check(spec.gain_grid.max > spec.gain_grid.min, grid, "max", "must exceed min");
  check(spec.gain_grid.points_per_decade >= 1, grid, "points_per_decade", "must be >= 1");
  for (std::size_t i = 0; i < spec.alpha_values.size(); ++i) {
    const double a = spec.alpha_values[i];
    if (!(a > 0.0 && a <= 1.0))
      throw ConfigValueError(child(path, "alpha_values") + "[" + std::to_string(i) + "]", "must be in (0, 1]");
  }
  validate_sensor(spec.base_sensor, child(path, "base_sensor"));
  check(spec.plume_depth > 0.0, path, "plume_depth", "must be > 0 m");
  check(spec.n_air > 0.0, path, "n_air", "must be > 0 molecules/m^3");
  validate_pair(spec.sigma_mir, child(path, "sigma_mir"));
  validate_pair(spec.sigma_swir, child(path, "sigma_swir"));
}

/// Builds a RunConfig from a parsed document, applying defaults then checking invariants.
inline RunConfig from_json(const json& doc) {
  using namespace detail;
  const std::string root = "$";
  require_object(doc, root, {"sensor", "direct", "plume", "sigma_mir", "sigma_swir", "fringe", "sweep", "monte_carlo"});

  RunConfig cfg;
  if (auto it = doc.find("sensor"); it != doc.end()) read_sensor(*it, "$.sensor", cfg.sensor);
  if (auto it = doc.find("sigma_mir"); it != doc.end()) read_pair(*it, "$.sigma_mir", cfg.sigma_mir);
  if (auto it = doc.find("sigma_swir"); it != doc.end()) read_pair(*it, "$.sigma_swir", cfg.sigma_swir);
  if (auto it = doc.find("plume"); it != doc.end()) {
    require_object(*it, "$.plume", {"depth", "mixing_ratio", "n_air"});
    read(*it, "$.plume", "depth", cfg.plume.depth);
    read(*it, "$.plume", "mixing_ratio", cfg.plume.mixing_ratio);
    read(*it, "$.plume", "n_air", cfg.plume.n_air);
  }

  // The direct baseline shares the sensor's parameters unless overridden.
  cfg.direct = sweep::shared_direct_config(cfg.sensor);
  if (auto it = doc.find("direct"); it != doc.end()) {
    require_object(*it, "$.direct", {"eta", "alpha", "t_int", "power", "lambda_probe"});
    read(*it, "$.direct", "eta", cfg.direct.eta);
    read(*it, "$.direct", "alpha", cfg.direct.alpha);
    read(*it, "$.direct", "t_int", cfg.direct.t_int);
    read(*it, "$.direct", "power", cfg.direct.power);
    read(*it, "$.direct", "lambda_probe", cfg.direct.lambda_probe);
  }

  cfg.fringe.sensor = cfg.sensor;
  cfg.fringe.lambda_idler = cfg.sensor.lambda_idler;
  bool scan_length_given = false;
  if (auto it = doc.find("fringe"); it != doc.end()) {
    const std::string p = "$.fringe";
    require_object(*it, p, {"lambda_idler", "scan_length", "steps", "counts_scale", "phase_offset", "rng_seed"});
    read(*it, p, "lambda_idler", cfg.fringe.lambda_idler);
    scan_length_given = read(*it, p, "scan_length", cfg.fringe.scan_length);
    read_int(*it, p, "steps", cfg.fringe.steps);
    read(*it, p, "counts_scale", cfg.fringe.counts_scale);
    read(*it, p, "phase_offset", cfg.fringe.phase_offset);
    read_int(*it, p, "rng_seed", cfg.fringe.rng_seed);
  }
  if (!scan_length_given) cfg.fringe.scan_length = 3.0 * cfg.fringe.lambda_idler;

  cfg.sweep.base_sensor = cfg.sensor;
  cfg.sweep.plume_depth = cfg.plume.depth > 0.0 ? cfg.plume.depth : 1.0;
  cfg.sweep.n_air = cfg.plume.n_air;
  cfg.sweep.sigma_mir = cfg.sigma_mir;
  cfg.sweep.sigma_swir = cfg.sigma_swir;
  if (auto it = doc.find("sweep"); it != doc.end()) read_sweep_spec(*it, cfg.sweep, "$.sweep");

  if (auto it = doc.find("monte_carlo"); it != doc.end()) {
    require_object(*it, "$.monte_carlo", {"trials", "rng_seed"});
    read_int(*it, "$.monte_carlo", "trials", cfg.monte_carlo.trials);
    read_int(*it, "$.monte_carlo", "rng_seed", cfg.monte_carlo.rng_seed);
  }

  validate_sensor(cfg.sensor, "$.sensor");
  const std::string d = "$.direct";
  check(cfg.direct.eta > 0.0 && cfg.direct.eta <= 1.0, d, "eta", "must be in (0, 1]");
  check(cfg.direct.alpha > 0.0 && cfg.direct.alpha <= 1.0, d, "alpha", "must be in (0, 1]");
  check(cfg.direct.t_int > 0.0, d, "t_int", "must be > 0 s");
  check(cfg.direct.power > 0.0, d, "power", "must be > 0 W");
  check(cfg.direct.lambda_probe > 0.0, d, "lambda_probe", "must be > 0 um");
  check(cfg.plume.depth >= 0.0, "$.plume", "depth", "must be >= 0 m");
  check(cfg.plume.mixing_ratio >= 0.0, "$.plume", "mixing_ratio", "must be >= 0");
  check(cfg.plume.n_air > 0.0, "$.plume", "n_air", "must be > 0 molecules/m^3");
  validate_pair(cfg.sigma_mir, "$.sigma_mir");
  validate_pair(cfg.sigma_swir, "$.sigma_swir");
  check(cfg.fringe.lambda_idler > 0.0, "$.fringe", "lambda_idler", "must be > 0 um");
  check(cfg.fringe.scan_length > 0.0, "$.fringe", "scan_length", "must be > 0 um");
  check(cfg.fringe.steps >= 8, "$.fringe", "steps", "must be >= 8");
  check(cfg.fringe.counts_scale >= 0.0, "$.fringe", "counts_scale", "must be >= 0");
  validate_sweep_spec(cfg.sweep, "$.sweep");
  check(cfg.monte_carlo.trials >= 100, "$.monte_carlo", "trials", "must be >= 100");
  return cfg;
}

inline RunConfig parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigParseError("$", std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

}  // namespace nlint::config
