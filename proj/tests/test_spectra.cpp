#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "nlint/spectra.hpp"
#include "oracles.hpp"

using namespace nlint;
using namespace nlint::spectra;
using nlint::testing::RecordFields;

namespace {

RecordFields ch4_fields() {
  RecordFields f;
  f.molecule = 6;
  f.isotopologue = 1;
  f.wavenumber_micro = 3'105'000'000;  // 3105.000000
  f.intensity_mantissa = 1000;
  f.intensity_exponent = -19;
  f.einstein_mantissa = 2345;
  f.einstein_exponent = 1;
  f.gamma_air_e4 = 550;
  f.gamma_self_e4 = 800;
  f.lower_energy_e4 = 1'045'123;
  f.n_air_e2 = 75;
  f.delta_air_e6 = -1234;
  return f;
}

HitranLine test_line() {
  HitranLine l;
  l.molecule_id = 6;
  l.isotopologue_id = 1;
  l.wavenumber = 3000.0;
  l.intensity = 2.0e-20;
  l.gamma_air = 0.06;
  l.gamma_self = 0.08;
  l.n_air_exponent = 0.75;
  l.delta_air = -0.005;
  return l;
}

}  // namespace

TEST(ParseHitranRecord, SyntheticCh4Record) {
  const std::string record = nlint::testing::format_record(ch4_fields());
  ASSERT_EQ(record.size(), 160u);
  const HitranLine line = parse_hitran_record(record);
  EXPECT_EQ(line.molecule_id, 6);
  EXPECT_EQ(line.isotopologue_id, 1);
  EXPECT_EQ(line.wavenumber, 3105.0);
  EXPECT_DOUBLE_EQ(line.intensity, 1.0e-19);
  EXPECT_DOUBLE_EQ(line.einstein_a, 23.45);
  EXPECT_DOUBLE_EQ(line.gamma_air, 0.055);
  EXPECT_DOUBLE_EQ(line.gamma_self, 0.08);
  EXPECT_DOUBLE_EQ(line.lower_state_energy, 104.5123);
  EXPECT_DOUBLE_EQ(line.n_air_exponent, 0.75);
  EXPECT_DOUBLE_EQ(line.delta_air, -0.001234);
  EXPECT_EQ(line.trailing, std::string(93, ' '));
}

TEST(ParseHitranRecord, AcceptsCrlfTerminator) {
  const std::string record = nlint::testing::format_record(ch4_fields()) + "\r";
  EXPECT_EQ(parse_hitran_record(record).wavenumber, 3105.0);
}

TEST(ParseHitranRecord, WrongLengthThrows) {
  std::string record = nlint::testing::format_record(ch4_fields());
  EXPECT_THROW(parse_hitran_record(record.substr(0, 80)), RecordLengthError);
  EXPECT_THROW(parse_hitran_record(record + " "), RecordLengthError);
  try {
    parse_hitran_record(record.substr(0, 80));
  } catch (const RecordLengthError& e) {
    EXPECT_EQ(e.length(), 80u);
  }
}

TEST(ParseHitranRecord, NonNumericWavenumberNamesColumns) {
  std::string record = nlint::testing::format_record(ch4_fields());
  record.replace(3, 12, "         ABC");
  try {
    parse_hitran_record(record);
    FAIL() << "expected FieldParseError";
  } catch (const FieldParseError& e) {
    EXPECT_EQ(e.first_column(), 4);
    EXPECT_EQ(e.last_column(), 15);
    EXPECT_NE(std::string(e.what()).find("columns 4-15"), std::string::npos);
  }
}

TEST(ParseHitranRecord, RejectsOutOfRangeInvariants) {
  auto f = ch4_fields();
  f.gamma_air_e4 = 0;
  EXPECT_THROW(parse_hitran_record(nlint::testing::format_record(f)), FieldParseError);
  f = ch4_fields();
  f.molecule = 0;
  EXPECT_THROW(parse_hitran_record(nlint::testing::format_record(f)), FieldParseError);
}

// Generated corpus: oracle-formatted record -> parse -> library format must be
// byte-identical, and the decoded values must be the generated ones.
TEST(ParseHitranRecord, RoundTripGeneratedCorpus) {
  std::mt19937_64 rng(20240607);
  for (int i = 0; i < 1000; ++i) {
    const RecordFields f = nlint::testing::random_record(rng);
    const std::string record = nlint::testing::format_record(f);
    const HitranLine line = parse_hitran_record(record);
    ASSERT_EQ(format_hitran_record(line), record) << "record " << i;
    EXPECT_EQ(line.molecule_id, f.molecule);
    EXPECT_EQ(line.isotopologue_id, f.isotopologue);
    EXPECT_EQ(line.wavenumber, f.wavenumber());
    EXPECT_NEAR(line.intensity, f.intensity(), 1e-14 * f.intensity());
    EXPECT_NEAR(line.einstein_a, f.einstein_a(), 1e-14 * f.einstein_a());
    EXPECT_EQ(line.gamma_air, f.gamma_air());
    EXPECT_EQ(line.gamma_self, f.gamma_self());
    EXPECT_EQ(line.lower_state_energy, f.lower_energy());
    EXPECT_EQ(line.n_air_exponent, f.n_air());
    EXPECT_EQ(line.delta_air, f.delta_air());
  }
}

TEST(ParseHitranFile, EmptyStream) {
  std::istringstream in("");
  const auto result = parse_hitran_file(in);
  EXPECT_TRUE(result.lines.empty());
  EXPECT_EQ(result.diagnostics.skipped, 0u);
  EXPECT_EQ(result.diagnostics.lines_read, 0u);
}

TEST(ParseHitranFile, FilterByWavenumberKeepsOrder) {
  auto a = ch4_fields();
  auto b = ch4_fields();
  auto c = ch4_fields();
  a.wavenumber_micro = 3100'000000;
  b.wavenumber_micro = 2500'000000;
  c.wavenumber_micro = 3050'500000;
  std::ostringstream text;
  for (const auto& f : {a, b, c}) text << nlint::testing::format_record(f) << "\r\n";
  std::istringstream in(text.str());
  const auto result = parse_hitran_file(in, {.molecule_id = 6, .wavenumber_min = 3000.0, .wavenumber_max = 3200.0});
  ASSERT_EQ(result.lines.size(), 2u);
  EXPECT_EQ(result.lines[0].wavenumber, 3100.0);
  EXPECT_EQ(result.lines[1].wavenumber, 3050.5);
}

TEST(ParseHitranFile, FilterByMolecule) {
  auto co2 = ch4_fields();
  co2.molecule = 2;
  std::istringstream in(nlint::testing::format_record(co2) + "\n" +
                        nlint::testing::format_record(ch4_fields()) + "\n");
  const auto result = parse_hitran_file(in, {.molecule_id = 6});
  ASSERT_EQ(result.lines.size(), 1u);
  EXPECT_EQ(result.lines[0].molecule_id, 6);
}

TEST(ParseHitranFile, StrictModeReportsLineNumber) {
  const std::string good = nlint::testing::format_record(ch4_fields());
  std::istringstream in(good + "\n" + good.substr(0, 80) + "\n" + good + "\n");
  try {
    parse_hitran_file(in);
    FAIL() << "expected RecordLengthError";
  } catch (const RecordLengthError& e) {
    EXPECT_EQ(e.line_number(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseHitranFile, LenientModeSkipsAndCounts) {
  const std::string good = nlint::testing::format_record(ch4_fields());
  std::string bad = good;
  bad.replace(15, 10, "   garbage");
  std::istringstream in(good + "\n" + good.substr(0, 80) + "\n" + bad + "\n" + good + "\n");
  HitranFilter lenient;
  lenient.lenient = true;
  const auto result = parse_hitran_file(in, lenient);
  EXPECT_EQ(result.lines.size(), 2u);
  EXPECT_EQ(result.diagnostics.skipped, 2u);
  ASSERT_EQ(result.diagnostics.messages.size(), 2u);
  EXPECT_NE(result.diagnostics.messages[0].find("line 2"), std::string::npos);
  EXPECT_NE(result.diagnostics.messages[1].find("columns 16-25"), std::string::npos);
}

TEST(ParseHitranFile, MissingFileIsIoError) {
  EXPECT_THROW(parse_hitran_file(std::string("/nonexistent/lines.par")), IoError);
}

TEST(LorentzianCrossSection, PeakValueAtShiftedCenter) {
  const HitranLine line = test_line();
  const EnvironmentConditions env{0.8, 296.0};
  const double gamma = line.gamma_air * 0.8;
  const double center = line.wavenumber + line.delta_air * 0.8;
  EXPECT_DOUBLE_EQ(lorentzian_cross_section(line, center, env),
                   line.intensity / (std::numbers::pi * gamma) * 1e-4);
}

TEST(LorentzianCrossSection, HalfMaximumAtHwhm) {
  const HitranLine line = test_line();
  const EnvironmentConditions env{1.0, 250.0};
  const double gamma = line.gamma_air * std::pow(296.0 / 250.0, line.n_air_exponent);
  const double center = line.wavenumber + line.delta_air;
  const double peak = lorentzian_cross_section(line, center, env);
  // center +/- gamma is rounded at the scale of the line position, not gamma.
  EXPECT_NEAR(lorentzian_cross_section(line, center + gamma, env), 0.5 * peak, 1e-10 * peak);
  EXPECT_NEAR(lorentzian_cross_section(line, center - gamma, env), 0.5 * peak, 1e-10 * peak);
}

TEST(LorentzianCrossSection, IntegratesToLineIntensity) {
  const HitranLine line = test_line();
  const EnvironmentConditions env{1.0, 296.0};
  const double gamma = line.gamma_air;
  const double center = line.wavenumber + line.delta_air;
  // +-1000 gamma misses 2/(1000 pi) = 0.064% of the area in the wings.
  const double area = nlint::testing::simpson(
      [&](double nu) { return lorentzian_cross_section(line, nu, env) * 1e4; },
      center - 1000 * gamma, center + 1000 * gamma, 2'000'000);
  EXPECT_NEAR(area / line.intensity, 1.0, 0.01);
  EXPECT_NEAR(area / line.intensity, 1.0 - 2.0 / (1000.0 * std::numbers::pi), 1e-6);
}

TEST(LorentzianCrossSection, PositiveSymmetricMonotone) {
  const HitranLine line = test_line();
  const EnvironmentConditions env{1.0, 296.0};
  const double center = shifted_center(line, env);
  double previous = lorentzian_cross_section(line, center, env);
  for (int i = 1; i <= 400; ++i) {
    const double offset = 0.01 * i;
    const double right = lorentzian_cross_section(line, center + offset, env);
    const double left = lorentzian_cross_section(line, center - offset, env);
    EXPECT_GT(right, 0.0);
    EXPECT_NEAR(left, right, 1e-12 * right);
    EXPECT_LT(right, previous);
    previous = right;
  }
}

TEST(LorentzianCrossSection, PressureDoublingHalvesPeakKeepsArea) {
  HitranLine line = test_line();
  line.delta_air = 0.0;
  const EnvironmentConditions p1{1.0, 296.0}, p2{2.0, 296.0};
  EXPECT_DOUBLE_EQ(lorentz_hwhm(line, p2), 2.0 * lorentz_hwhm(line, p1));
  EXPECT_NEAR(lorentzian_cross_section(line, line.wavenumber, p2),
              0.5 * lorentzian_cross_section(line, line.wavenumber, p1), 1e-30);
  auto area = [&](const EnvironmentConditions& env) {
    return nlint::testing::simpson([&](double nu) { return lorentzian_cross_section(line, nu, env) * 1e4; },
                                   line.wavenumber - 200.0, line.wavenumber + 200.0, 4'000'000);
  };
  const double a1 = area(p1), a2 = area(p2);
  EXPECT_NEAR(a1 / line.intensity, 1.0, 0.01);
  EXPECT_NEAR(a2 / line.intensity, 1.0, 0.01);
}

TEST(LorentzianCrossSection, RejectsNonPositiveWavenumber) {
  EXPECT_THROW(lorentzian_cross_section(test_line(), 0.0, {}), DomainError);
}

TEST(CrossSectionAt, EmptyListIsZero) {
  EXPECT_EQ(cross_section_at({}, 3.221, {}), 0.0);
}

TEST(CrossSectionAt, SingleLinePeakAndLinearity) {
  const HitranLine line = test_line();
  const EnvironmentConditions env{1.0, 296.0};
  const double center = shifted_center(line, env);
  const std::vector<HitranLine> one{line};
  const std::vector<HitranLine> two{line, line};
  const double wl = 1e4 / center;
  EXPECT_NEAR(cross_section_at(one, wl, env), lorentzian_cross_section(line, center, env),
              1e-9 * lorentzian_cross_section(line, center, env));
  EXPECT_EQ(cross_section_at(two, wl, env), 2.0 * cross_section_at(one, wl, env));
}

TEST(CrossSectionAt, AdditiveOverConcatenation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> nu(2990.0, 3010.0), s(1e-22, 1e-19), g(0.01, 0.1);
  std::vector<HitranLine> a, b;
  for (int i = 0; i < 20; ++i) {
    HitranLine l = test_line();
    l.wavenumber = nu(rng);
    l.intensity = s(rng);
    l.gamma_air = g(rng);
    (i % 2 ? a : b).push_back(l);
  }
  std::vector<HitranLine> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const EnvironmentConditions env{0.9, 280.0};
  for (double wl : {3.32, 3.333, 3.34}) {
    const double sum = cross_section_at(a, wl, env) + cross_section_at(b, wl, env);
    EXPECT_NEAR(cross_section_at(ab, wl, env), sum, 1e-12 * sum);
  }
}

TEST(ReferenceCrossSectionValues, MirAndSwir) {
  const auto ref = paper_cross_sections();
  EXPECT_EQ(ref.mir.sigma_on, 1.18e-22);
  EXPECT_EQ(ref.mir.sigma_off, 0.0);
  EXPECT_EQ(ref.mir.lambda_on, 3.221);
  EXPECT_EQ(ref.swir.sigma_on, 1.81e-24);
  EXPECT_EQ(ref.swir.sigma_off, 0.0);
  EXPECT_EQ(ref.swir.lambda_on, 1.65);
  EXPECT_NEAR(ref.mir.differential() / ref.swir.differential(), 65.19, 0.01);
}
