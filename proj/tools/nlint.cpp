// nlint: command-line front end for the nonlinear-interferometer methane
// sensing model.
//
// Exit codes: 0 ok, 2 parse error, 3 I/O error, 4 domain or degenerate input.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlint/nlint.hpp"

namespace {

using namespace nlint;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitIo = 3;
constexpr int kExitDomain = 4;

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

config::RunConfig load_config(const std::string& path) {
  return path.empty() ? config::from_json(config::json::object()) : config::load(path);
}

/// NLINT_SEED replaces the seed from the file; an explicit flag wins over both.
std::uint64_t resolve_seed(std::uint64_t file_seed, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NLINT_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0') throw config::ConfigParseError("NLINT_SEED", "not an unsigned integer");
    return v;
  }
  return file_seed;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct ParseHitranArgs {
  std::string path;
  std::optional<int> molecule;
  double wn_min = 0.0;
  double wn_max = 1e9;
  bool lenient = false;
};

int cmd_parse_hitran(const ParseHitranArgs& args) {
  spectra::HitranFilter filter{.molecule_id = args.molecule,
                               .wavenumber_min = args.wn_min,
                               .wavenumber_max = args.wn_max,
                               .lenient = args.lenient};
  const auto result = spectra::parse_hitran_file(args.path, filter);
  std::cout << "# records: " << result.lines.size() << '\n';
  std::cout << "molecule_id,isotopologue_id,wavenumber_cm-1,intensity,einstein_a,gamma_air,"
               "gamma_self,lower_state_energy,n_air_exponent,delta_air\n";
  char line[256];
  for (const auto& l : result.lines) {
    std::snprintf(line, sizeof line, "%d,%d,%.6f,%.3e,%.3e,%.4f,%.4f,%.4f,%.2f,%.6f\n", l.molecule_id,
                  l.isotopologue_id, l.wavenumber, l.intensity, l.einstein_a, l.gamma_air, l.gamma_self,
                  l.lower_state_energy, l.n_air_exponent, l.delta_air);
    std::cout << line;
  }
  if (args.lenient) {
    for (const auto& msg : result.diagnostics.messages) std::cerr << "skipped " << msg << '\n';
    std::cerr << "diagnostics: " << result.diagnostics.skipped << " malformed line(s) skipped\n";
  }
  return kExitOk;
}

struct XsectionArgs {
  std::string hitran;
  std::vector<double> wavelengths;
  double pressure = 1.0;
  double temperature = 296.0;
  int molecule = 6;
};

int cmd_xsection(const XsectionArgs& args) {
  const auto ref = spectra::paper_cross_sections();
  if (args.hitran.empty()) {
    std::cout << "reference CH4 cross sections (m^2/molecule)\n";
    std::cout << "  MIR  lambda_on = " << fmt("%.3f", ref.mir.lambda_on) << " um  sigma_on = "
              << fmt("%.3e", ref.mir.sigma_on) << "  sigma_off = " << fmt("%.3e", ref.mir.sigma_off) << '\n';
    std::cout << "  SWIR lambda_on = " << fmt("%.3f", ref.swir.lambda_on) << " um  sigma_on = "
              << fmt("%.3e", ref.swir.sigma_on) << "  sigma_off = " << fmt("%.3e", ref.swir.sigma_off) << '\n';
    std::cout << "  MIR/SWIR differential ratio = "
              << fmt("%.4f", ref.mir.differential() / ref.swir.differential()) << '\n';
    return kExitOk;
  }
  if (args.wavelengths.empty()) throw DomainError("--wavelength is required with --hitran");
  if (!(args.pressure > 0.0) || !(args.temperature > 0.0))
    throw DomainError("pressure and temperature must be positive");
  const auto parsed = spectra::parse_hitran_file(args.hitran, {.molecule_id = args.molecule});
  const spectra::EnvironmentConditions env{args.pressure, args.temperature};
  std::cout << "wavelength_um,wavenumber_cm-1,sigma_m2\n";
  for (double wl : args.wavelengths) {
    const double sigma = spectra::cross_section_at(parsed.lines, wl, env);
    std::cout << fmt("%.6f", wl) << ',' << fmt("%.6f", 1e4 / wl) << ',' << fmt("%.6e", sigma) << '\n';
  }
  return kExitOk;
}

struct SensitivityArgs {
  std::string config;
  std::string method = "nd";
  std::optional<double> gain, alpha, t_int, p_idler, depth;
};

int cmd_sensitivity(const SensitivityArgs& args) {
  auto cfg = load_config(args.config);
  if (args.gain) cfg.sensor.gain = *args.gain;
  if (args.alpha) cfg.sensor.alpha = cfg.direct.alpha = *args.alpha;
  if (args.t_int) cfg.sensor.t_int = cfg.direct.t_int = *args.t_int;
  if (args.p_idler) cfg.sensor.p_idler = cfg.direct.power = *args.p_idler;
  if (args.depth) cfg.plume.depth = *args.depth;
  const bool nd = args.method == "nd" || args.method == "both";
  const bool direct = args.method == "direct" || args.method == "both";

  if (!(cfg.plume.depth > 0.0)) throw config::ConfigValueError("$.plume.depth", "must be > 0 m for a sensitivity");
  if (nd && cfg.sigma_mir.differential() == 0.0)
    throw config::ConfigValueError("$.sigma_mir.sigma_on", "equals sigma_off: zero differential cross section");
  if (direct && cfg.sigma_swir.differential() == 0.0)
    throw config::ConfigValueError("$.sigma_swir.sigma_on", "equals sigma_off: zero differential cross section");
  if (nd && !(cfg.sensor.gain > 0.0)) throw config::ConfigValueError("$.sensor.gain", "must be > 0 for a sensitivity");

  const double z = cfg.plume.depth;
  std::cout << "plume depth Z = " << fmt("%g", z) << " m, n_air = " << fmt("%.3e", cfg.plume.n_air)
            << " molecules/m^3\n";
  if (nd) {
    print_warnings(physics::regime_warnings(cfg.sensor));
    const double n = physics::mean_signal_photons(cfg.sensor, 1.0);
    const double dx = physics::sensitivity_without_detection(cfg.sensor, z, cfg.plume.n_air, cfg.sigma_mir);
    std::cout << "[sensing without detection]\n";
    std::cout << "  mean signal photons (T = 1): " << fmt("%.6e", n) << '\n';
    std::cout << "  SNR (T = 1): " << fmt("%.6e", physics::snr_without_detection(cfg.sensor, 1.0)) << '\n';
    std::cout << "  delta X_CH4: " << fmt("%.6e", dx) << " (mixing ratio)\n";
    std::cout << "  delta_x_nd: " << fmt("%.4g", dx * z * 1e6) << " ppm·m\n";
  }
  if (direct) {
    const double n = physics::mean_direct_photons(cfg.direct, 1.0);
    const double dx = physics::sensitivity_direct(cfg.direct, z, cfg.plume.n_air, cfg.sigma_swir);
    std::cout << "[direct sensing]\n";
    std::cout << "  mean photons (T = 1): " << fmt("%.6e", n) << '\n';
    std::cout << "  SNR (T = 1): " << fmt("%.6e", physics::snr_direct(cfg.direct, 1.0)) << '\n';
    std::cout << "  delta X_CH4: " << fmt("%.6e", dx) << " (mixing ratio)\n";
    std::cout << "  delta_x_direct: " << fmt("%.4g", dx * z * 1e6) << " ppm·m\n";
  }
  if (nd && direct) {
    std::cout << "relative sensitivity R_S: "
              << fmt("%.6e", physics::relative_sensitivity(cfg.sigma_mir, cfg.sigma_swir, cfg.sensor.gain))
              << '\n';
    std::cout << "crossover gain (R_S = 1): "
              << fmt("%.6e", physics::crossover_gain(cfg.sigma_mir, cfg.sigma_swir)) << '\n';
  }
  return kExitOk;
}

struct FringeArgs {
  std::string config;
  double transmittance = 1.0;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

int cmd_fringe(const FringeArgs& args) {
  auto cfg = load_config(args.config);
  if (args.alpha) {
    if (!(*args.alpha > 0.0 && *args.alpha <= 1.0)) throw config::ConfigValueError("--alpha", "must be in (0, 1]");
    cfg.sensor.alpha = cfg.fringe.sensor.alpha = *args.alpha;
  }
  if (!(args.transmittance >= 0.0 && args.transmittance <= 1.0))
    throw DomainError("--transmittance must be in [0, 1], got " + fmt("%g", args.transmittance));
  cfg.fringe.rng_seed = resolve_seed(cfg.fringe.rng_seed, args.seed);
  print_warnings(physics::regime_warnings(cfg.fringe.sensor, args.transmittance));

  const auto scan = fringe::simulate_scan(cfg.fringe, args.transmittance);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw IoError("cannot open " + args.out + " for writing");
    fringe::write_scan_csv(out, scan);
  }
  const double r = cfg.fringe.sensor.alpha * args.transmittance * args.transmittance;
  std::cout << "r = alpha*T^2: " << fmt("%.6g", r) << '\n';
  std::cout << "model visibility: " << fmt("%.6f", physics::visibility_from_ratio(r)) << '\n';
  const auto est = fringe::estimate_visibility(scan, cfg.fringe.lambda_idler);
  std::cout << "visibility: " << fmt("%.6f", est.visibility) << " +/- " << fmt("%.6f", est.visibility_std) << '\n';
  std::cout << "period_um: " << fmt("%.6f", est.period) << " +/- " << fmt("%.6f", est.period_std) << '\n';
  std::cout << "mean_level_counts: " << fmt("%.3f", est.mean_level) << '\n';
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::string out = ".";
};

int cmd_sweep(const SweepArgs& args) {
  const auto cfg = load_config(args.config);
  const auto rows = sweep::run_sweep(cfg.sweep);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw IoError("cannot create " + args.out + ": " + ec.message());
  const fs::path dir(args.out);
  sweep::emit_csv(rows, (dir / "sweep.csv").string());
  sweep::emit_plot(rows, sweep::PlotKind::rs_vs_gain, (dir / "rs_vs_gain.svg").string());
  sweep::emit_plot(rows, sweep::PlotKind::deltax_vs_gain, (dir / "deltax_vs_gain.svg").string());
  std::cout << "rows: " << rows.size() << '\n';
  if (auto g = sweep::find_crossover(rows)) std::cout << "crossover gain (R_S = 1): " << fmt("%.6e", *g) << '\n';
  std::cout << "wrote " << (dir / "sweep.csv").string() << ", " << (dir / "rs_vs_gain.svg").string() << ", "
            << (dir / "deltax_vs_gain.svg").string() << '\n';
  return kExitOk;
}

struct MonteCarloArgs {
  std::string config;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
};

int cmd_monte_carlo(const MonteCarloArgs& args) {
  auto cfg = load_config(args.config);
  auto spec = cfg.monte_carlo_spec();
  if (args.trials) spec.trials = *args.trials;
  spec.rng_seed = resolve_seed(spec.rng_seed, args.seed);
  const auto r = sweep::run_monte_carlo(spec);
  std::cout << "trials: " << r.trials << " (rejected " << r.rejected << ")\n";
  std::cout << "signal photons (on): " << fmt("%.6e", r.signal_photons_on)
            << ", local oscillator photons: " << fmt("%.6e", r.lo_photons) << '\n';
  std::cout << "mean X: " << fmt("%.6e", r.mean_x) << " (true " << fmt("%.6e", r.true_x) << ")\n";
  std::cout << "empirical delta X: " << fmt("%.6e", r.delta_x) << " +/- " << fmt("%.6e", r.delta_x_std) << '\n';
  std::cout << "propagated delta X: " << fmt("%.6e", r.analytic_delta_x) << '\n';
  std::cout << "closed-form delta X (T = 1): " << fmt("%.6e", r.closed_form_delta_x) << '\n';
  std::cout << "empirical / propagated: " << fmt("%.4f", r.delta_x / r.analytic_delta_x) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear-interferometer methane sensing: sensitivities, fringes and sweeps"};
  app.require_subcommand(1);

  ParseHitranArgs ph;
  auto* parse_cmd = app.add_subcommand("parse-hitran", "Decode a HITRAN 160-column .par line list to CSV");
  parse_cmd->add_option("path", ph.path, "HITRAN .par file")->required();
  parse_cmd->add_option("--molecule", ph.molecule, "HITRAN molecule id (CH4 = 6); default: all");
  parse_cmd->add_option("--wn-min", ph.wn_min, "lower wavenumber bound [cm^-1]");
  parse_cmd->add_option("--wn-max", ph.wn_max, "upper wavenumber bound [cm^-1]");
  parse_cmd->add_flag("--lenient", ph.lenient, "skip malformed records instead of failing");

  XsectionArgs xs;
  auto* xs_cmd = app.add_subcommand("xsection", "Absorption cross sections: reference values or from a line list");
  xs_cmd->add_option("--hitran", xs.hitran, "HITRAN .par file; omit for the reference CH4 values");
  xs_cmd->add_option("--wavelength", xs.wavelengths, "vacuum wavelength(s) [um]");
  xs_cmd->add_option("--pressure", xs.pressure, "pressure [atm]");
  xs_cmd->add_option("--temperature", xs.temperature, "temperature [K]");
  xs_cmd->add_option("--molecule", xs.molecule, "HITRAN molecule id");

  SensitivityArgs sa;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Minimum detectable CH4 (delta X) for each method");
  sens_cmd->add_option("--config", sa.config, "JSON run configuration");
  sens_cmd->add_option("--method", sa.method, "nd | direct | both")->check(CLI::IsMember({"nd", "direct", "both"}));
  sens_cmd->add_option("--gain", sa.gain, "parametric gain G [dimensionless]");
  sens_cmd->add_option("--alpha", sa.alpha, "target return efficiency alpha [dimensionless]");
  sens_cmd->add_option("--t-int", sa.t_int, "integration time [s]");
  sens_cmd->add_option("--p-idler", sa.p_idler, "idler / probe laser power [W]");
  sens_cmd->add_option("--depth", sa.depth, "plume depth Z [m]");

  FringeArgs fa;
  auto* fringe_cmd = app.add_subcommand("fringe", "Simulate a shot-noise fringe scan and fit its visibility");
  fringe_cmd->add_option("--config", fa.config, "JSON run configuration");
  fringe_cmd->add_option("--transmittance", fa.transmittance, "single-pass plume transmittance T [0..1]");
  fringe_cmd->add_option("--alpha", fa.alpha, "target return efficiency alpha [dimensionless]");
  fringe_cmd->add_option("--out", fa.out, "write the scan as CSV (position_um,expected,sampled)");
  fringe_cmd->add_option("--seed", fa.seed, "random seed [64-bit integer]");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep G and alpha; write sweep.csv and two SVG plots");
  sweep_cmd->add_option("--config", sw.config, "JSON run configuration");
  sweep_cmd->add_option("--out", sw.out, "output directory");

  MonteCarloArgs mc;
  auto* mc_cmd = app.add_subcommand("monte-carlo", "Monte Carlo check of the delta X error propagation");
  mc_cmd->add_option("--config", mc.config, "JSON run configuration");
  mc_cmd->add_option("--trials", mc.trials, "number of trials [>= 100]");
  mc_cmd->add_option("--seed", mc.seed, "random seed [64-bit integer]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (*parse_cmd) return cmd_parse_hitran(ph);
    if (*xs_cmd) return cmd_xsection(xs);
    if (*sens_cmd) return cmd_sensitivity(sa);
    if (*fringe_cmd) return cmd_fringe(fa);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*mc_cmd) return cmd_monte_carlo(mc);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const config::ConfigParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const RecordLengthError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const FieldParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}
