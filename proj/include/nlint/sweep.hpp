#pragma once

// Gain/return-efficiency sweeps of both sensitivities, the Monte Carlo check
// of the error propagation, and CSV/SVG emission of sweep tables.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nlint/errors.hpp"
#include "nlint/physics.hpp"
#include "nlint/random.hpp"
#include "nlint/spectra.hpp"

namespace nlint::sweep {

using physics::PlumeState;
using physics::SensorConfig;
using spectra::CrossSectionPair;

/// Log-spaced grid, both ends included.
struct GainGrid {
  double min = 1e-8;
  double max = 1e-2;
  int points_per_decade = 10;
};

struct SweepSpec {
  GainGrid gain_grid;
  std::vector<double> alpha_values{1e-8, 1e-6, 1e-4, 1e-2, 1.0};
  SensorConfig base_sensor;
  double plume_depth = 1.0;  // m
  double n_air = kDefaultAirDensity;
  CrossSectionPair sigma_mir = spectra::paper_cross_sections().mir;
  CrossSectionPair sigma_swir = spectra::paper_cross_sections().swir;
};

/// One (G, alpha) cell. Sensitivities are in ppm*m.
struct SweepRow {
  double gain = 0.0;
  double alpha = 0.0;
  double delta_x_nd = 0.0;
  double delta_x_direct = 0.0;
  double r_s = 0.0;
};

struct MonteCarloSpec {
  SensorConfig sensor;
  PlumeState plume;
  CrossSectionPair sigma_mir = spectra::paper_cross_sections().mir;
  int trials = 10000;
  std::uint64_t rng_seed = 42;
};

struct MonteCarloResult {
  double delta_x = 0.0;            // empirical std of retrieved X
  double delta_x_std = 0.0;        // bootstrap std of delta_x
  double mean_x = 0.0;
  double true_x = 0.0;
  double analytic_delta_x = 0.0;   // error propagation at the actual T_on, T_off
  double closed_form_delta_x = 0.0;  // T_on = T_off = 1 closed form
  double signal_photons_on = 0.0;
  double lo_photons = 0.0;
  int trials = 0;
  int rejected = 0;                // trials with a non-positive fringe amplitude
};

inline std::vector<double> gain_values(const GainGrid& grid) {
  if (!(grid.min > 0.0) || !(grid.max > grid.min))
    throw DomainError("gain grid needs 0 < min < max");
  if (grid.points_per_decade < 1) throw DomainError("gain grid needs points_per_decade >= 1");
  const double lo = std::log10(grid.min);
  const double hi = std::log10(grid.max);
  const int intervals = std::max(1, static_cast<int>(std::lround((hi - lo) * grid.points_per_decade)));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    out.push_back(i == 0 ? grid.min
                  : i == intervals ? grid.max
                                   : std::pow(10.0, lo + (hi - lo) * i / intervals));
  }
  return out;
}

/// Direct-detection baseline sharing eta, alpha, T_int, power and wavelength with the sensor.
inline physics::DirectConfig shared_direct_config(const SensorConfig& sensor) {
  return {.eta = sensor.eta,
          .alpha = sensor.alpha,
          .t_int = sensor.t_int,
          .power = sensor.p_idler,
          .lambda_probe = sensor.lambda_signal};
}

inline SweepRow evaluate_cell(const SweepSpec& spec, double gain, double alpha) {
  SensorConfig sensor = spec.base_sensor;
  sensor.gain = gain;
  sensor.alpha = alpha;
  const auto direct = shared_direct_config(sensor);
  const double to_ppm_m = spec.plume_depth * 1e6;
  try {
    SweepRow row;
    row.gain = gain;
    row.alpha = alpha;
    row.delta_x_nd = physics::sensitivity_without_detection(sensor, spec.plume_depth, spec.n_air,
                                                            spec.sigma_mir) * to_ppm_m;
    row.delta_x_direct = physics::sensitivity_direct(direct, spec.plume_depth, spec.n_air,
                                                     spec.sigma_swir) * to_ppm_m;
    row.r_s = physics::relative_sensitivity(spec.sigma_mir, spec.sigma_swir, gain);
    return row;
  } catch (const DegenerateError& e) {
    char cell[96];
    std::snprintf(cell, sizeof cell, "cell (gain=%.6g, alpha=%.6g): ", gain, alpha);
    throw DegenerateError(cell + std::string(e.what()));
  } catch (const DomainError& e) {
    char cell[96];
    std::snprintf(cell, sizeof cell, "cell (gain=%.6g, alpha=%.6g): ", gain, alpha);
    throw DomainError(cell + std::string(e.what()));
  }
}

/// Evaluates every (G, alpha) cell; rows ordered by alpha then G, ascending.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  const std::vector<double> gains = gain_values(spec.gain_grid);
  std::vector<double> alphas = spec.alpha_values;
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("alpha values must be in (0, 1]");
  }
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  std::vector<SweepRow> rows(alphas.size() * gains.size());
  for (std::size_t cell = 0; cell < rows.size(); ++cell) {
    rows[cell] = evaluate_cell(spec, gains[cell % gains.size()], alphas[cell / gains.size()]);
  }
  return rows;
}

/// Gain at which R_S crosses 1, log-log interpolated between the bracketing grid cells.
inline std::optional<double> find_crossover(std::span<const SweepRow> rows) {
  if (rows.empty()) return std::nullopt;
  std::vector<SweepRow> series;
  for (const auto& row : rows) {
    if (row.alpha == rows.front().alpha) series.push_back(row);
  }
  std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.gain < b.gain; });
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const auto& lo = series[i];
    const auto& hi = series[i + 1];
    if (lo.r_s == 1.0) return lo.gain;
    if (lo.r_s < 1.0 && hi.r_s >= 1.0 && lo.r_s > 0.0) {
      const double t = -std::log(lo.r_s) / (std::log(hi.r_s) - std::log(lo.r_s));
      return std::exp(std::log(lo.gain) + t * (std::log(hi.gain) - std::log(lo.gain)));
    }
  }
  return std::nullopt;
}

namespace detail {
inline double sample_std(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}
}  // namespace detail

/// Empirical mixing-ratio precision from Poisson-sampled fringe extrema.
///
/// Each trial counts the fringe maximum and minimum for T_int/2 each, at the
/// on- and off-resonance transmittances of the plume, forms the DAOD from the
/// max-minus-min amplitudes and inverts it to X. Trial i draws from stream
/// stream_seed(rng_seed, i), so the result does not depend on scheduling.
inline MonteCarloResult run_monte_carlo(const MonteCarloSpec& spec) {
  if (spec.trials < 100) throw DomainError("monte carlo needs at least 100 trials");
  const auto& s = spec.sensor;
  const double t_on = physics::transmittance(spec.plume, spec.sigma_mir.sigma_on);
  const double t_off = physics::transmittance(spec.plume, spec.sigma_mir.sigma_off);
  const double lo = physics::local_oscillator_photons(s);
  const double sig_on = physics::mean_signal_photons(s, t_on);
  const double sig_off = physics::mean_signal_photons(s, t_off);
  if (!(sig_on >= 10.0) || !(sig_off >= 10.0)) {
    throw DegenerateError("mean signal photons per trial below 10 (on " + std::to_string(sig_on) +
                          ", off " + std::to_string(sig_off) + "): Gaussian error propagation not meaningful");
  }
  const double column = spec.plume.depth * spec.plume.n_air * spec.sigma_mir.differential();
  if (!(column > 0.0)) throw DegenerateError("zero differential column cross section");

  auto extremum_means = [lo](double sig) {
    const double cross = 2.0 * std::sqrt(lo * sig);
    return std::pair{0.5 * (lo + sig + cross), 0.5 * (lo + sig - cross)};
  };
  const auto [on_max, on_min] = extremum_means(sig_on);
  const auto [off_max, off_min] = extremum_means(sig_off);

  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(spec.trials));
  MonteCarloResult result;
  for (int i = 0; i < spec.trials; ++i) {
    RandomStream rng(stream_seed(spec.rng_seed, static_cast<std::uint64_t>(i)));
    const auto r_on = static_cast<double>(rng.poisson(on_max) - rng.poisson(on_min));
    const auto r_off = static_cast<double>(rng.poisson(off_max) - rng.poisson(off_min));
    if (!(r_on > 0.0) || !(r_off > 0.0)) {
      ++result.rejected;
      continue;
    }
    x.push_back(physics::daod_from_fringe_amplitudes(r_on, r_off) / column);
  }
  if (x.size() < 2) throw DegenerateError("too few valid monte carlo trials");

  result.trials = spec.trials;
  result.delta_x = detail::sample_std(x);
  double mean = 0.0;
  for (double v : x) mean += v;
  result.mean_x = mean / static_cast<double>(x.size());
  result.true_x = spec.plume.mixing_ratio;
  result.signal_photons_on = sig_on;
  result.lo_photons = lo;
  result.analytic_delta_x = physics::sensitivity_from_snr(
      physics::snr_without_detection(s, t_on), physics::snr_without_detection(s, t_off),
      spec.plume.depth, spec.plume.n_air, spec.sigma_mir);
  result.closed_form_delta_x =
      physics::sensitivity_without_detection(s, spec.plume.depth, spec.plume.n_air, spec.sigma_mir);

  constexpr int kResamples = 200;
  std::vector<double> stds(kResamples);
  std::vector<double> resample(x.size());
  for (int b = 0; b < kResamples; ++b) {
    RandomStream rng(stream_seed(mix64(spec.rng_seed), static_cast<std::uint64_t>(b)));
    for (auto& v : resample) v = x[rng.below(x.size())];
    stds[static_cast<std::size_t>(b)] = detail::sample_std(resample);
  }
  result.delta_x_std = detail::sample_std(stds);
  return result;
}

inline constexpr const char* kCsvHeader = "gain,alpha,delta_x_nd_ppm_m,delta_x_direct_ppm_m,r_s";

/// Writes the sweep table, 9 significant digits, LF endings. Returns bytes written.
inline std::size_t emit_csv(std::span<const SweepRow> rows, std::ostream& out) {
  std::string text = std::string(kCsvHeader) + "\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.8e,%.8e,%.8e,%.8e,%.8e\n", r.gain, r.alpha, r.delta_x_nd,
                  r.delta_x_direct, r.r_s);
    text += line;
  }
  out << text;
  out.flush();
  if (!out) throw IoError("failed to write sweep CSV");
  return text.size();
}

inline std::size_t emit_csv(std::span<const SweepRow> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return emit_csv(rows, out);
}

inline std::vector<SweepRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FieldParseError(1, 1, "missing sweep CSV header");
  std::vector<SweepRow> rows;
  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    double values[5];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 5; ++i) {
      auto [ptr, ec] = std::from_chars(p, end, values[i]);
      if (ec != std::errc{} || (i < 4 ? (ptr == end || *ptr != ',') : ptr != end))
        throw FieldParseError(row_number, row_number, "malformed sweep CSV row: " + line);
      p = ptr + 1;
    }
    rows.push_back({values[0], values[1], values[2], values[3], values[4]});
  }
  return rows;
}

enum class PlotKind { rs_vs_gain, deltax_vs_gain };

namespace detail {

struct LogAxis {
  double lo_decade = 0.0;
  double hi_decade = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double value) const {
    const double t = (std::log10(value) - lo_decade) / (hi_decade - lo_decade);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

inline LogAxis make_axis(double min_value, double max_value, double pixel_lo, double pixel_hi) {
  double lo = std::floor(std::log10(min_value));
  double hi = std::ceil(std::log10(max_value));
  if (hi <= lo) {
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi, pixel_lo, pixel_hi};
}

inline std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

}  // namespace detail

/// Self-contained SVG 1.1 log-log plot of a sweep.
/// rs_vs_gain: R_S against G with a reference line at R_S = 1 and a marker at the crossover.
/// deltax_vs_gain: one polyline of the interferometer sensitivity per alpha.
inline std::size_t emit_plot(std::span<const SweepRow> rows, PlotKind kind, std::ostream& out) {
  if (rows.empty()) throw DomainError("cannot plot an empty sweep");
  constexpr double width = 760, height = 500;
  constexpr double left = 90, right = 170, top = 40, bottom = 70;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

  std::map<double, std::vector<SweepRow>> series;
  for (const auto& r : rows) {
    if (kind == PlotKind::deltax_vs_gain || r.alpha == rows.front().alpha) series[r.alpha].push_back(r);
  }
  for (auto& [alpha, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.gain < b.gain; });
  }
  auto y_of = [kind](const SweepRow& r) { return kind == PlotKind::rs_vs_gain ? r.r_s : r.delta_x_nd; };

  double gmin = rows.front().gain, gmax = gmin, ymin = y_of(rows.front()), ymax = ymin;
  for (const auto& [alpha, pts] : series) {
    for (const auto& r : pts) {
      gmin = std::min(gmin, r.gain);
      gmax = std::max(gmax, r.gain);
      ymin = std::min(ymin, y_of(r));
      ymax = std::max(ymax, y_of(r));
    }
  }
  if (kind == PlotKind::rs_vs_gain) {
    ymin = std::min(ymin, 1.0);
    ymax = std::max(ymax, 1.0);
  }
  if (!(gmin > 0.0) || !(ymin > 0.0)) throw DomainError("log axes need positive values");
  const auto xa = detail::make_axis(gmin, gmax, left, width - right);
  const auto ya = detail::make_axis(ymin, ymax, height - bottom, top);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<title>"
      << (kind == PlotKind::rs_vs_gain ? "Relative sensitivity R_S versus gain G"
                                       : "Interferometer sensitivity versus gain G")
      << "</title>\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  // frame and decade grid
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << (width - left - right)
      << "\" height=\"" << (height - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = xa.lo_decade; d <= xa.hi_decade + 0.5; d += 1.0) {
    const std::string x = detail::fmt("%.2f", xa.map(std::pow(10.0, d)));
    svg << "<line class=\"grid\" x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\""
        << (height - bottom) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << (height - bottom + 18)
        << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (double d = ya.lo_decade; d <= ya.hi_decade + 0.5; d += 1.0) {
    const std::string y = detail::fmt("%.2f", ya.map(std::pow(10.0, d)));
    svg << "<line class=\"grid\" x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << (width - right)
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << (left - 8) << "\" y=\"" << y << "\" text-anchor=\"end\" dy=\"4\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  svg << "<text x=\"" << (left + (width - left - right) / 2) << "\" y=\"" << (height - 25)
      << "\" text-anchor=\"middle\">parametric gain G (dimensionless)</text>\n";
  svg << "<text transform=\"translate(25," << (top + (height - top - bottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">"
      << (kind == PlotKind::rs_vs_gain ? "R_S = δX direct / δX interferometer (dimensionless)"
                                       : "δX_CH4 (ppm·m)")
      << "</text>\n";

  if (kind == PlotKind::rs_vs_gain) {
    const std::string y1 = detail::fmt("%.2f", ya.map(1.0));
    svg << "<line class=\"reference\" x1=\"" << left << "\" y1=\"" << y1 << "\" x2=\""
        << (width - right) << "\" y2=\"" << y1
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    svg << "<text x=\"" << (width - right + 6) << "\" y=\"" << y1 << "\" dy=\"4\">R_S = 1</text>\n";
  }

  int index = 0;
  for (const auto& [alpha, pts] : series) {
    const char* colour = palette[index % std::size(palette)];
    if (pts.size() == 1) {
      svg << "<circle class=\"series\" cx=\"" << detail::fmt("%.2f", xa.map(pts[0].gain)) << "\" cy=\""
          << detail::fmt("%.2f", ya.map(y_of(pts[0]))) << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
    } else {
      svg << "<polyline class=\"series\" fill=\"none\" stroke-width=\"2\" stroke=\"" << colour
          << "\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        svg << (i ? " " : "") << detail::fmt("%.2f", xa.map(pts[i].gain)) << ','
            << detail::fmt("%.2f", ya.map(y_of(pts[i])));
      }
      svg << "\"/>\n";
    }
    if (kind == PlotKind::deltax_vs_gain) {
      const double ly = top + 20.0 + 20.0 * index;
      svg << "<line x1=\"" << (width - right + 10) << "\" y1=\"" << ly << "\" x2=\""
          << (width - right + 35) << "\" y2=\"" << ly << "\" stroke=\"" << colour
          << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << (width - right + 40) << "\" y=\"" << ly << "\" dy=\"4\">α = "
          << detail::fmt("%.0e", alpha) << "</text>\n";
    }
    ++index;
  }

  if (kind == PlotKind::rs_vs_gain) {
    if (auto g = find_crossover(rows)) {
      const std::string cx = detail::fmt("%.2f", xa.map(*g));
      const std::string cy = detail::fmt("%.2f", ya.map(1.0));
      svg << "<circle class=\"crossover\" data-gain=\"" << detail::fmt("%.6e", *g) << "\" cx=\"" << cx
          << "\" cy=\"" << cy << "\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << cx << "\" y=\"" << cy << "\" dx=\"8\" dy=\"-8\">G = "
          << detail::fmt("%.3g", *g) << "</text>\n";
    }
  }
  svg << "</g>\n</svg>\n";

  const std::string text = svg.str();
  out << text;
  out.flush();
  if (!out) throw IoError("failed to write SVG plot");
  return text.size();
}

inline std::size_t emit_plot(std::span<const SweepRow> rows, PlotKind kind, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return emit_plot(rows, kind, out);
}

}  // namespace nlint::sweep
