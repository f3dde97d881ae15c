#pragma once

// HITRAN 2004 ".par" line lists and Lorentzian absorption cross sections.
//
// Everything inside this header works in HITRAN units (cm^-1, cm^2/molecule,
// atm). Cross-section results are returned in m^2/molecule.

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nlint/errors.hpp"

namespace nlint::spectra {

inline constexpr std::size_t kRecordLength = 160;
inline constexpr double kReferenceTemperature = 296.0;  // K

/// One decoded 160-column transition record.
struct HitranLine {
  int molecule_id = 0;
  int isotopologue_id = 0;
  double wavenumber = 0.0;          // cm^-1
  double intensity = 0.0;           // cm^-1/(molecule cm^-2) at 296 K
  double einstein_a = 0.0;          // s^-1
  double gamma_air = 0.0;           // cm^-1/atm, HWHM
  double gamma_self = 0.0;          // cm^-1/atm, HWHM
  double lower_state_energy = 0.0;  // cm^-1
  double n_air_exponent = 0.0;
  double delta_air = 0.0;           // cm^-1/atm
  std::string trailing;             // columns 68-160, kept verbatim
};

struct EnvironmentConditions {
  double pressure = 1.0;       // atm
  double temperature = 296.0;  // K
};

/// Effective on/off-resonance cross sections, m^2/molecule, wavelengths in um.
struct CrossSectionPair {
  double sigma_on = 0.0;
  double sigma_off = 0.0;
  double lambda_on = 0.0;
  double lambda_off = 0.0;

  double differential() const { return sigma_on - sigma_off; }
};

/// Column layout of the decoded part of a record (1-based, inclusive).
struct FieldSpec {
  std::string_view name;
  int first;
  int last;
  char kind;       // 'I' integer, 'F' fixed, 'E' exponent
  int decimals;
};

inline constexpr FieldSpec kFields[] = {
    {"molecule_id", 1, 2, 'I', 0},         {"isotopologue_id", 3, 3, 'I', 0},
    {"wavenumber", 4, 15, 'F', 6},         {"intensity", 16, 25, 'E', 3},
    {"einstein_a", 26, 35, 'E', 3},        {"gamma_air", 36, 40, 'F', 4},
    {"gamma_self", 41, 45, 'F', 4},        {"lower_state_energy", 46, 55, 'F', 4},
    {"n_air_exponent", 56, 59, 'F', 2},    {"delta_air", 60, 67, 'F', 6},
};
inline constexpr int kDecodedColumns = 67;

namespace detail {

inline std::string_view column_slice(std::string_view record, const FieldSpec& f) {
  return record.substr(static_cast<std::size_t>(f.first - 1),
                       static_cast<std::size_t>(f.last - f.first + 1));
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view record, const FieldSpec& f) {
  const std::string_view raw = column_slice(record, f);
  std::string_view text = trim(raw);
  if (text.empty()) throw FieldParseError(f.first, f.last, std::string(f.name) + " is blank");
  // from_chars rejects a leading '+', Fortran writers emit one occasionally.
  if (text.front() == '+') text.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FieldParseError(f.first, f.last,
                          std::string(f.name) + " is not numeric: \"" + std::string(raw) + "\"");
  }
  return value;
}

/// Fortran-style Fw.d: drops the leading zero ("0.0550" -> ".0550") when needed to fit.
inline std::string format_fixed(double value, int width, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (static_cast<int>(s.size()) > width) {
    if (s.rfind("0.", 0) == 0) {
      s.erase(0, 1);
    } else if (s.rfind("-0.", 0) == 0) {
      s.erase(1, 1);
    }
  }
  if (static_cast<int>(s.size()) > width) {
    throw DomainError("value " + std::string(buf) + " does not fit in F" + std::to_string(width) +
                      "." + std::to_string(decimals));
  }
  return std::string(static_cast<std::size_t>(width) - s.size(), ' ') + s;
}

inline std::string format_exponent(double value, int width, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*E", width, decimals, value);
  std::string s = buf;
  if (static_cast<int>(s.size()) > width) {
    throw DomainError("value " + s + " does not fit in E" + std::to_string(width) + "." +
                      std::to_string(decimals));
  }
  return s;
}

inline std::string format_integer(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) > width) {
    throw DomainError("integer " + s + " does not fit in I" + std::to_string(width));
  }
  return std::string(static_cast<std::size_t>(width) - s.size(), ' ') + s;
}

}  // namespace detail

/// Decodes one record. A trailing '\r' (CRLF files) is ignored.
inline HitranLine parse_hitran_record(std::string_view record) {
  if (!record.empty() && record.back() == '\r') record.remove_suffix(1);
  if (record.size() != kRecordLength) throw RecordLengthError(record.size());

  HitranLine line;
  line.molecule_id = detail::parse_number<int>(record, kFields[0]);
  line.isotopologue_id = detail::parse_number<int>(record, kFields[1]);
  line.wavenumber = detail::parse_number<double>(record, kFields[2]);
  line.intensity = detail::parse_number<double>(record, kFields[3]);
  line.einstein_a = detail::parse_number<double>(record, kFields[4]);
  line.gamma_air = detail::parse_number<double>(record, kFields[5]);
  line.gamma_self = detail::parse_number<double>(record, kFields[6]);
  line.lower_state_energy = detail::parse_number<double>(record, kFields[7]);
  line.n_air_exponent = detail::parse_number<double>(record, kFields[8]);
  line.delta_air = detail::parse_number<double>(record, kFields[9]);
  line.trailing = std::string(record.substr(kDecodedColumns));

  if (line.molecule_id < 1 || line.molecule_id > 99)
    throw FieldParseError(1, 2, "molecule_id out of range [1, 99]");
  if (line.isotopologue_id < 0 || line.isotopologue_id > 9)
    throw FieldParseError(3, 3, "isotopologue_id out of range [0, 9]");
  if (!(line.wavenumber > 0.0)) throw FieldParseError(4, 15, "wavenumber must be positive");
  if (line.intensity < 0.0) throw FieldParseError(16, 25, "intensity must be non-negative");
  if (!(line.gamma_air > 0.0)) throw FieldParseError(36, 40, "gamma_air must be positive");
  return line;
}

/// Inverse of parse_hitran_record. Throws DomainError if a value does not fit its field.
inline std::string format_hitran_record(const HitranLine& line) {
  std::string out;
  out.reserve(kRecordLength);
  out += detail::format_integer(line.molecule_id, 2);
  out += detail::format_integer(line.isotopologue_id, 1);
  out += detail::format_fixed(line.wavenumber, 12, 6);
  out += detail::format_exponent(line.intensity, 10, 3);
  out += detail::format_exponent(line.einstein_a, 10, 3);
  out += detail::format_fixed(line.gamma_air, 5, 4);
  out += detail::format_fixed(line.gamma_self, 5, 4);
  out += detail::format_fixed(line.lower_state_energy, 10, 4);
  out += detail::format_fixed(line.n_air_exponent, 4, 2);
  out += detail::format_fixed(line.delta_air, 8, 6);
  std::string tail = line.trailing.substr(0, kRecordLength - kDecodedColumns);
  tail.resize(kRecordLength - kDecodedColumns, ' ');
  return out + tail;
}

struct HitranFilter {
  std::optional<int> molecule_id;  // empty: any molecule
  double wavenumber_min = 0.0;     // cm^-1, inclusive
  double wavenumber_max = 1e9;     // cm^-1, inclusive
  bool lenient = false;
};

struct ParseDiagnostics {
  std::size_t lines_read = 0;
  std::size_t skipped = 0;
  std::vector<std::string> messages;  // one per skipped line
};

struct ParseResult {
  std::vector<HitranLine> lines;
  ParseDiagnostics diagnostics;
};

/// Reads a line list, keeping records that pass the filter, in file order.
/// Strict mode rethrows the first record error with its line number; lenient
/// mode skips malformed records and counts them. Empty lines are not records.
inline ParseResult parse_hitran_file(std::istream& in, const HitranFilter& filter = {}) {
  if (!(filter.wavenumber_min < filter.wavenumber_max)) {
    throw DomainError("wavenumber interval lower bound must be below upper bound");
  }
  ParseResult result;
  std::string text;
  std::size_t line_number = 0;
  while (std::getline(in, text)) {
    ++line_number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    ++result.diagnostics.lines_read;
    try {
      HitranLine line = parse_hitran_record(text);
      if (filter.molecule_id && line.molecule_id != *filter.molecule_id) continue;
      if (line.wavenumber < filter.wavenumber_min || line.wavenumber > filter.wavenumber_max) continue;
      result.lines.push_back(std::move(line));
    } catch (const RecordLengthError& e) {
      if (!filter.lenient) throw RecordLengthError(e.length(), line_number);
      ++result.diagnostics.skipped;
      result.diagnostics.messages.push_back("line " + std::to_string(line_number) + ": " + e.what());
    } catch (const FieldParseError& e) {
      if (!filter.lenient) {
        throw FieldParseError(e.first_column(), e.last_column(),
                              "line " + std::to_string(line_number) + ": " + e.what());
      }
      ++result.diagnostics.skipped;
      result.diagnostics.messages.push_back("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read error after line " + std::to_string(line_number));
  return result;
}

inline ParseResult parse_hitran_file(const std::string& path, const HitranFilter& filter = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  return parse_hitran_file(in, filter);
}

/// Pressure-shifted line centre, cm^-1.
inline double shifted_center(const HitranLine& line, const EnvironmentConditions& env) {
  return line.wavenumber + line.delta_air * env.pressure;
}

/// Lorentz HWHM, cm^-1.
inline double lorentz_hwhm(const HitranLine& line, const EnvironmentConditions& env) {
  return line.gamma_air * env.pressure *
         std::pow(kReferenceTemperature / env.temperature, line.n_air_exponent);
}

/// Pressure-broadened cross section of a single line at `wavenumber` [cm^-1], in m^2/molecule.
/// Line intensity is used at its 296 K reference value.
inline double lorentzian_cross_section(const HitranLine& line, double wavenumber,
                                       const EnvironmentConditions& env) {
  if (!(wavenumber > 0.0)) throw DomainError("wavenumber must be positive");
  const double gamma = lorentz_hwhm(line, env);
  const double detuning = wavenumber - shifted_center(line, env);
  const double sigma_cm2 =
      line.intensity * (gamma / std::numbers::pi) / (detuning * detuning + gamma * gamma);
  return sigma_cm2 * 1e-4;
}

/// Sum of all line contributions at a vacuum wavelength in micrometres, m^2/molecule.
inline double cross_section_at(std::span<const HitranLine> lines, double wavelength_um,
                               const EnvironmentConditions& env) {
  if (!(wavelength_um > 0.0)) throw DomainError("wavelength must be positive");
  const double wavenumber = 1e4 / wavelength_um;
  double total = 0.0;
  for (const auto& line : lines) total += lorentzian_cross_section(line, wavenumber, env);
  return total;
}

/// Fixed effective CH4 cross sections for the 3.221 um idler line and the 1.65 um SWIR line.
struct ReferenceCrossSections {
  CrossSectionPair mir;
  CrossSectionPair swir;
};

inline ReferenceCrossSections paper_cross_sections() {
  return {
      .mir = {.sigma_on = 1.18e-22, .sigma_off = 0.0, .lambda_on = 3.221, .lambda_off = 3.221},
      .swir = {.sigma_on = 1.81e-24, .sigma_off = 0.0, .lambda_on = 1.65, .lambda_off = 1.65},
  };
}

}  // namespace nlint::spectra
