#pragma once

// Mirror-scan interference fringes of the signal detector: noiseless model,
// Poisson-sampled scans, visibility fitting and on/off visibility inversion.
//
// Path convention: a position z is the one-way idler path increment with the
// fold already included, so phase = 2 pi z / lambda_idler and one fringe
// period is exactly lambda_idler. A mirror-translation axis would halve it.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nlint/errors.hpp"
#include "nlint/physics.hpp"
#include "nlint/random.hpp"

namespace nlint::fringe {

using physics::SensorConfig;

struct FringeScanConfig {
  SensorConfig sensor;
  double lambda_idler = 3.221;       // um
  double scan_length = 3 * 3.221;    // um
  int steps = 100;
  double counts_scale = 1000.0;      // mean photons per step
  double phase_offset = 0.0;         // rad
  std::uint64_t rng_seed = 42;
};

struct FringeScan {
  std::vector<double> positions;       // um
  std::vector<double> expected;        // noiseless mean counts
  std::vector<std::int64_t> sampled;   // empty for a noiseless scan
};

struct VisibilityEstimate {
  double visibility = 0.0;
  double visibility_std = 0.0;
  double period = 0.0;       // um
  double period_std = 0.0;   // um, 0 when the period was held fixed
  double mean_level = 0.0;   // counts
};

/// Ratio of idler transmittances T_on/T_off recovered from two fringe visibilities.
struct TransmittanceRatio {
  double ratio = 1.0;
  double ratio_std = 0.0;
  double daod = 0.0;
  double daod_std = 0.0;
  double r_on = 0.0;
  double r_off = 0.0;
  std::vector<std::string> warnings;
};

inline void validate(const FringeScanConfig& cfg) {
  if (!(cfg.lambda_idler > 0.0)) throw DomainError("lambda_idler must be positive");
  if (!(cfg.scan_length > 0.0)) throw DomainError("scan_length must be positive");
  if (cfg.steps < 8) throw DomainError("steps must be at least 8");
  if (!(cfg.counts_scale >= 0.0)) throw DomainError("counts_scale must be non-negative");
}

/// Noiseless scan: counts_scale * (1 + V cos phi) with V = 2 sqrt(r)/(1+r), r = alpha T^2.
/// The factor normalises the mean over whole periods to counts_scale.
inline FringeScan expected_fringe(const FringeScanConfig& cfg, double transmittance) {
  validate(cfg);
  physics::check_transmittance(transmittance);
  const double r = cfg.sensor.alpha * transmittance * transmittance;
  const double visibility = physics::visibility_from_ratio(r);
  const auto n = static_cast<std::size_t>(cfg.steps);

  FringeScan scan;
  scan.positions.resize(n);
  scan.expected.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = cfg.scan_length * static_cast<double>(i) / static_cast<double>(n - 1);
    const double phase = 2.0 * std::numbers::pi * z / cfg.lambda_idler + cfg.phase_offset;
    scan.positions[i] = z;
    scan.expected[i] = std::max(0.0, cfg.counts_scale * (1.0 + visibility * std::cos(phase)));
  }
  return scan;
}

/// Poisson-sampled scan, a pure function of (cfg, transmittance) including the seed.
inline FringeScan simulate_scan(const FringeScanConfig& cfg, double transmittance) {
  FringeScan scan = expected_fringe(cfg, transmittance);
  RandomStream rng(mix64(cfg.rng_seed));
  scan.sampled.reserve(scan.expected.size());
  for (double mean : scan.expected) scan.sampled.push_back(rng.poisson(mean));
  return scan;
}

namespace detail {

struct HarmonicFit {
  Eigen::Vector3d params;      // A, C, S of A + C cos(kz) + S sin(kz)
  Eigen::Matrix3d covariance;
  double chi2 = 0.0;
};

inline HarmonicFit fit_harmonic(std::span<const double> z, std::span<const double> y,
                                std::span<const double> w, double k) {
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Eigen::Vector3d basis(1.0, std::cos(k * z[i]), std::sin(k * z[i]));
    normal.noalias() += w[i] * basis * basis.transpose();
    rhs.noalias() += w[i] * y[i] * basis;
  }
  HarmonicFit fit;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  fit.params = ldlt.solve(rhs);
  fit.covariance = ldlt.solve(Eigen::Matrix3d::Identity());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double m = fit.params[0] + fit.params[1] * std::cos(k * z[i]) + fit.params[2] * std::sin(k * z[i]);
    fit.chi2 += w[i] * (y[i] - m) * (y[i] - m);
  }
  return fit;
}

/// Angular spatial frequency of the best single-harmonic fit over a dense grid.
inline double dominant_wavenumber(std::span<const double> z, std::span<const double> y,
                                  std::span<const double> w, double span) {
  const double dz = span / static_cast<double>(z.size() - 1);
  const double f_min = 1.0 / span;
  const double f_max = 0.5 / dz;
  const double df = 0.02 / span;
  double best_f = f_min;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (double f = f_min; f <= f_max; f += df) {
    const double chi2 = fit_harmonic(z, y, w, 2.0 * std::numbers::pi * f).chi2;
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_f = f;
    }
  }
  return 2.0 * std::numbers::pi * best_f;
}

}  // namespace detail

/// Weighted least-squares fit of A + B cos(2 pi z / period + phi0) to the scan.
///
/// Fits `sampled` when present, otherwise `expected`. Weights are
/// 1/max(count, 1). The period starts from `lambda_hint` or from the dominant
/// spectral peak and is refined by Levenberg-Marquardt unless the fringe
/// amplitude is below twice its uncertainty, in which case it is held fixed.
/// visibility = |B|/A clamped to [0, 1], uncertainties from the fit covariance.
inline VisibilityEstimate estimate_visibility(const FringeScan& scan,
                                              std::optional<double> lambda_hint = std::nullopt) {
  const bool noisy = !scan.sampled.empty();
  const std::size_t n = scan.positions.size();
  if (n < 8) throw FitError("visibility fit needs at least 8 points");
  if ((noisy ? scan.sampled.size() : scan.expected.size()) != n)
    throw FitError("scan columns have different lengths");

  std::vector<double> y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = noisy ? static_cast<double>(scan.sampled[i]) : scan.expected[i];
    w[i] = 1.0 / std::max(y[i], 1.0);
  }
  const std::span<const double> z(scan.positions);
  const double span = scan.positions.back() - scan.positions.front();
  if (!(span > 0.0)) throw FitError("scan positions do not span a positive range");

  double k = 0.0;
  if (lambda_hint) {
    if (!(*lambda_hint > 0.0)) throw DomainError("lambda_hint must be positive");
    k = 2.0 * std::numbers::pi / *lambda_hint;
  } else {
    k = detail::dominant_wavenumber(z, y, w, span);
  }

  detail::HarmonicFit linear = detail::fit_harmonic(z, y, w, k);
  Eigen::Vector4d p(linear.params[0], linear.params[1], linear.params[2], k);
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  cov.topLeftCorner<3, 3>() = linear.covariance;

  const double amp = std::hypot(p[1], p[2]);
  const double amp_var = amp > 0.0
      ? (p[1] * p[1] * cov(1, 1) + p[2] * p[2] * cov(2, 2) + 2.0 * p[1] * p[2] * cov(1, 2)) / (amp * amp)
      : 0.5 * (cov(1, 1) + cov(2, 2));
  const bool refine_period = amp > 2.0 * std::sqrt(amp_var);

  if (refine_period) {
    auto evaluate = [&](const Eigen::Vector4d& q, Eigen::Matrix4d* jtj, Eigen::Vector4d* jtr) {
      double chi2 = 0.0;
      if (jtj) jtj->setZero();
      if (jtr) jtr->setZero();
      for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(q[3] * z[i]);
        const double s = std::sin(q[3] * z[i]);
        const double resid = y[i] - (q[0] + q[1] * c + q[2] * s);
        chi2 += w[i] * resid * resid;
        if (jtj) {
          const Eigen::Vector4d grad(1.0, c, s, z[i] * (q[2] * c - q[1] * s));
          jtj->noalias() += w[i] * grad * grad.transpose();
          jtr->noalias() += w[i] * resid * grad;
        }
      }
      return chi2;
    };

    double lambda_lm = 1e-3;
    Eigen::Matrix4d jtj;
    Eigen::Vector4d jtr;
    double chi2 = evaluate(p, &jtj, &jtr);
    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() *= 1.0 + lambda_lm;
      const Eigen::Vector4d step = damped.ldlt().solve(jtr);
      const Eigen::Vector4d trial = p + step;
      const double trial_chi2 = evaluate(trial, nullptr, nullptr);
      if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
        const double improvement = chi2 - trial_chi2;
        p = trial;
        chi2 = evaluate(p, &jtj, &jtr);
        lambda_lm = std::max(lambda_lm * 0.1, 1e-12);
        converged = improvement <= 1e-12 * std::max(chi2, 1e-300) ||
                    std::abs(step[3]) <= 1e-13 * std::abs(p[3]);
      } else {
        lambda_lm *= 10.0;
        converged = lambda_lm > 1e12;
      }
    }
    if (!converged) throw FitError("visibility fit did not converge");
    cov = jtj.ldlt().solve(Eigen::Matrix4d::Identity());
  }

  const double a = p[0];
  if (!(a > 0.0) || !p.allFinite()) throw FitError("fitted mean level is not positive");
  if (!(p[3] > 0.0)) throw FitError("fitted spatial frequency is not positive");

  const double b = std::hypot(p[1], p[2]);
  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
  double vis_var = 0.0;
  if (b > 0.0) {
    grad << -b / (a * a), p[1] / (a * b), p[2] / (a * b), 0.0;
    vis_var = grad.dot(cov * grad);
  } else {
    vis_var = 0.5 * (cov(1, 1) + cov(2, 2)) / (a * a);
  }

  VisibilityEstimate est;
  est.visibility = std::clamp(b / a, 0.0, 1.0);
  est.visibility_std = std::sqrt(std::max(vis_var, 0.0));
  est.period = 2.0 * std::numbers::pi / p[3];
  est.period_std = refine_period ? est.period * std::sqrt(std::max(cov(3, 3), 0.0)) / p[3] : 0.0;
  est.mean_level = a;
  return est;
}

/// Inverts both visibilities on the r <= 1 branch and forms T_on/T_off = sqrt(r_on/r_off)
/// and DAOD = ln(T_off/T_on), with the fit uncertainties combined in quadrature.
inline TransmittanceRatio transmittance_from_visibilities(const VisibilityEstimate& on,
                                                          const VisibilityEstimate& off) {
  if (!(on.visibility > 0.0) || !(off.visibility > 0.0))
    throw DomainError("visibility is zero: no fringe to invert");

  // d ln(sqrt r) / dV = 1 / (V sqrt(1 - V^2))
  auto log_amp_std = [](const VisibilityEstimate& v) {
    const double root = std::sqrt(std::max(0.0, 1.0 - v.visibility * v.visibility));
    return root > 0.0 ? v.visibility_std / (v.visibility * root)
                      : std::numeric_limits<double>::infinity();
  };

  TransmittanceRatio out;
  out.r_on = physics::ratio_from_visibility(on.visibility);
  out.r_off = physics::ratio_from_visibility(off.visibility);
  out.ratio = std::sqrt(out.r_on / out.r_off);
  out.daod = 0.5 * std::log(out.r_off / out.r_on);
  out.daod_std = std::hypot(log_amp_std(on), log_amp_std(off));
  out.ratio_std = out.ratio * out.daod_std;
  for (auto [label, r] : {std::pair{"on", out.r_on}, std::pair{"off", out.r_off}}) {
    if (r > 0.5) {
      out.warnings.push_back(std::string("ambiguity: r_") + label + " = " + std::to_string(r) +
                             " > 0.5, root selection r <= 1 assumed");
    }
  }
  return out;
}

/// Writes `position_um,expected,sampled`. Doubles use 17 significant digits so
/// read_scan_csv restores them exactly; `sampled` is blank for noiseless scans.
inline std::size_t write_scan_csv(std::ostream& out, const FringeScan& scan) {
  std::ostringstream buf;
  buf << "position_um,expected,sampled\n";
  char line[128];
  for (std::size_t i = 0; i < scan.positions.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,", scan.positions[i], scan.expected[i]);
    buf << line;
    if (!scan.sampled.empty()) buf << scan.sampled[i];
    buf << '\n';
  }
  const std::string text = buf.str();
  out << text;
  if (!out) throw IoError("failed to write fringe scan CSV");
  return text.size();
}

inline FringeScan read_scan_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "position_um,expected,sampled")
    throw FieldParseError(1, 1, "missing fringe CSV header");
  FringeScan scan;
  bool any_sampled = false;
  std::vector<std::optional<std::int64_t>> sampled;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw FieldParseError(static_cast<int>(row), static_cast<int>(row), "expected 3 columns");
    auto number = [&](std::size_t from, std::size_t to, auto& value) {
      auto [ptr, ec] = std::from_chars(line.data() + from, line.data() + to, value);
      if (ec != std::errc{} || ptr != line.data() + to)
        throw FieldParseError(static_cast<int>(row), static_cast<int>(row), "bad number in \"" + line + "\"");
    };
    double pos = 0.0, exp = 0.0;
    number(0, c1, pos);
    number(c1 + 1, c2, exp);
    scan.positions.push_back(pos);
    scan.expected.push_back(exp);
    if (c2 + 1 < line.size()) {
      std::int64_t count = 0;
      number(c2 + 1, line.size(), count);
      sampled.emplace_back(count);
      any_sampled = true;
    } else {
      sampled.emplace_back();
    }
  }
  if (any_sampled) {
    for (const auto& s : sampled) {
      if (!s) throw FieldParseError(0, 0, "sampled column is only partially filled");
      scan.sampled.push_back(*s);
    }
  }
  return scan;
}

}  // namespace nlint::fringe
