#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "phasetomo/compare.hpp"
#include "phasetomo/config.hpp"
#include "phasetomo/emit.hpp"
#include "phasetomo/errors.hpp"
#include "phasetomo/run.hpp"
#include "phasetomo/units.hpp"

using namespace phasetomo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("phasetomo_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small(RunConfig c) {
  c.scan.angle_count = 9;
  c.scan.displacement_count = 7;
  return c;
}

ConfigError config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("none");
}

}  // namespace

TEST(Units, ParsesAndConverts) {
  using units::Dimension;
  EXPECT_DOUBLE_EQ(units::parse("780 nm", Dimension::length).value, 780e-9);
  EXPECT_DOUBLE_EQ(units::parse("0.93um", Dimension::length).value, 0.93e-6);
  EXPECT_DOUBLE_EQ(units::parse("49.6 deg", Dimension::angle).value, 49.6 * kPi / 180.0);
  EXPECT_DOUBLE_EQ(units::parse("80 us", Dimension::time).value, 80e-6);
  EXPECT_DOUBLE_EQ(units::parse("1 kHz", Dimension::angular_frequency).value, 2e3 * kPi);
  EXPECT_DOUBLE_EQ(units::parse("48.33e3 rad/s", Dimension::angular_frequency).value, 48.33e3);
  const auto er = units::parse("37 Er", Dimension::energy);
  EXPECT_TRUE(er.in_recoil);
  EXPECT_DOUBLE_EQ(er.value, 37.0);
  EXPECT_NEAR(units::parse("87 u", Dimension::mass).value, 87.0 * kAtomicMassUnit, 1e-40);
  EXPECT_THROW(units::parse("780", Dimension::length), std::invalid_argument);
  EXPECT_THROW(units::parse("780 deg", Dimension::length), std::invalid_argument);
  EXPECT_THROW(units::parse("nm", Dimension::length), std::invalid_argument);
  const units::Quantity q{1.0 / 3.0, false};
  EXPECT_EQ(units::parse(units::format(q, Dimension::time), Dimension::time), q);
}

TEST(Config, EmptyDocumentTakesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.preparation.kind, PreparationKind::ground);
  EXPECT_DOUBLE_EQ(c.preparation.contamination, 0.10);
  EXPECT_EQ(parse_config("preparation: {}\n").preparation, PreparationSection{});
}

TEST(Config, DepthInRecoilResolvesThroughLattice) {
  const RunConfig c = parse_config("lattice:\n  depth: 37 Er\n");
  const LatticeSpec l = c.lattice_spec();
  const double k = lattice_vector(780e-9, 49.6 * kPi / 180.0);
  EXPECT_NEAR(l.depth() / (37.0 * recoil_energy(k, AtomicConstants{}.mass)), 1.0, 1e-14);
  const double joules = l.depth();
  const RunConfig si = parse_config("lattice:\n  depth: " + units::format({joules, false}, units::Dimension::energy) + "\n");
  EXPECT_NEAR(si.lattice_spec().depth_in_recoil(), 37.0, 1e-12);
}

TEST(Config, SemanticErrorsNameTheKey) {
  const ConfigError hold = config_error("preparation:\n  kind: coherent\n  hold_time: -5 us\n");
  EXPECT_EQ(hold.key(), "preparation.hold_time");
  EXPECT_NE(std::string(hold.what()).find("hold_time"), std::string::npos);
  EXPECT_EQ(hold.line(), 3);

  const ConfigError unknown = config_error("scan:\n  angle_cnt: 4\n");
  EXPECT_EQ(unknown.key(), "scan.angle_cnt");
  EXPECT_EQ(unknown.line(), 2);

  const ConfigError unitless = config_error("lattice:\n  wavelength: 780\n");
  EXPECT_EQ(unitless.key(), "lattice.wavelength");

  EXPECT_EQ(config_error("noise:\n  atom_count: 0\n").key(), "noise.atom_count");
  EXPECT_EQ(config_error("preparation:\n  contamination: 0.7\n").key(), "preparation.contamination");
  EXPECT_EQ(config_error("bogus: 1\n").key(), "bogus");
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  const ConfigError e = config_error("scan:\n  mode: [husimi\n");
  EXPECT_GT(e.line(), 0);
  EXPECT_GT(e.column(), 0);
}

TEST(Config, RoundTripThroughEmit) {
  for (const RunConfig& c : {RunConfig{}, RunConfig::husimi_default(), RunConfig::wigner_default()}) {
    const RunConfig back = parse_config(emit_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(emit_config(back), emit_config(c));
  }
  RunConfig odd = RunConfig::wigner_default();
  odd.output_directory = "dir with: colon";
  odd.noise.enabled = true;
  odd.noise.seed = 0xfffffffffffull;
  odd.preparation.shift = 0.155e-6;
  odd.preparation.shift_is_phase = false;
  EXPECT_EQ(parse_config(emit_config(odd)), odd);
}

TEST(Config, OverrideSetsDottedKey) {
  const RunConfig c = with_override(RunConfig::husimi_default(), "scan.displacement_step", "30 nm");
  EXPECT_DOUBLE_EQ(c.scan.displacement_step, 30e-9);
  EXPECT_EQ(with_override(c, "run_id", "x").run_id, "x");
  EXPECT_THROW(with_override(c, "scan.nope", "1"), ConfigError);
}

TEST(Config, PresetsMatchExperiments) {
  const RunConfig h = RunConfig::husimi_default();
  EXPECT_EQ(h.grid().size(), 513u);
  EXPECT_EQ(h.preparation.kind, PreparationKind::coherent);
  const RunConfig w = RunConfig::wigner_default();
  EXPECT_EQ(w.grid().size(), 779u);
  EXPECT_EQ(w.grid().mode, ScanMode::wigner);
  EXPECT_NEAR(w.lattice_spec().depth_in_recoil(), 17.5, 1e-12);
}

TEST(Run, DefaultWignerOriginSample) {
  const ResultBundle b = run(RunConfig::wigner_default());
  EXPECT_NEAR(b.samples[0].value, -0.4 / kPi, 1e-6);
  EXPECT_NEAR(b.samples[0].value, -0.127, 5e-4);
  ASSERT_TRUE(b.normalization.has_value());
  EXPECT_TRUE(b.normalization->ordered);
  EXPECT_EQ(b.bound_count, 2);
}

TEST(Run, DefaultHusimiPeak) {
  const ResultBundle b = run(RunConfig::husimi_default());
  ASSERT_TRUE(b.peak.has_value());
  const double da = b.grid.displacements[1] / (2.0 * b.x0);
  const double dt = b.grid.angles[1] - b.grid.angles[0];
  EXPECT_NEAR(b.peak->alpha_abs, 0.88, da);
  EXPECT_NEAR(b.peak->theta, 0.97, dt);
  EXPECT_FALSE(b.fits.empty());
  ASSERT_TRUE(b.xrms.has_value());
}

TEST(Run, WidenedGroundStateFit) {
  RunConfig c = parse_config(
      "oscillator:\n  omega: 48.33e3 rad/s\n"
      "preparation:\n  kind: ground\n  contamination: 0.16\n  ground_width: 96.3 nm\n");
  EXPECT_EQ(parse_config(emit_config(c)), c);
  const ResultBundle b = run(c);
  ASSERT_FALSE(b.fits.empty());
  EXPECT_NEAR(b.fits[0].fit.width / 1e-9, 143.80482616524722, 0.05);
  EXPECT_LT(b.preparation_loss, 1e-6);
  EXPECT_TRUE(compare(b).pass);
  EXPECT_EQ(config_error("preparation:\n  kind: coherent\n  ground_width: 96.3 nm\n").key(), "preparation.ground_width");
  EXPECT_EQ(config_error("preparation:\n  ground_width: -1 nm\n").key(), "preparation.ground_width");
}

TEST(Run, DeterministicAcrossExecutionModes) {
  RunConfig c = small(RunConfig::husimi_default());
  c.execution.parallel = false;
  const std::string serial = samples_csv(run(c));
  EXPECT_EQ(serial, samples_csv(run(c)));
  c.execution.parallel = true;
  c.execution.threads = 4;
  EXPECT_EQ(serial, samples_csv(run(c)));
  c.noise.enabled = true;
  const std::string noisy = samples_csv(run(c));
  c.execution.parallel = false;
  EXPECT_EQ(noisy, samples_csv(run(c)));
  EXPECT_NE(noisy, serial);
}

TEST(Run, ConfigEchoReproducesRun) {
  const RunConfig c = small(RunConfig::wigner_default());
  const ResultBundle a = run(c);
  const ResultBundle b = run(parse_config(a.config_echo));
  EXPECT_EQ(samples_csv(a), samples_csv(b));
}

TEST(Run, WarningsAppearOnce) {
  ResultBundle b;
  b.warn("x");
  b.warn("y");
  b.warn("x");
  EXPECT_EQ(b.warnings, (std::vector<std::string>{"x", "y"}));
  RunConfig c = small(RunConfig::husimi_default());
  c.scan.displacement_count = 4;
  const ResultBundle r = run(c);
  for (std::size_t i = 0; i < r.warnings.size(); ++i)
    for (std::size_t j = i + 1; j < r.warnings.size(); ++j) EXPECT_NE(r.warnings[i], r.warnings[j]);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Run, StageErrorsCarryContext) {
  RunConfig c = RunConfig::wigner_default();
  c.lattice.depth = {3.0, true};
  c.preparation.kind = PreparationKind::inverted;
  c.preparation.hold_time = 10e-6;
  try {
    run(c);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("prepar"), std::string::npos) << e.what();
  }
}

TEST(Emit, CsvRoundTripIsExact) {
  const ResultBundle b = run(small(RunConfig::husimi_default()));
  const std::string csv = samples_csv(b);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSamplesHeader);
  EXPECT_EQ(parse_samples_csv(csv), sample_rows(b));
  const fs::path dir = scratch("roundtrip");
  write_bundle(b, dir);
  for (const char* f : {"samples.csv", "cross_section.csv", "summary.json", "config.yaml"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(read_samples_csv(dir / "samples.csv"), sample_rows(b));
  fs::remove_all(dir);
}

TEST(Emit, CrossSectionsKeyedByRunId) {
  RunConfig ground = RunConfig::husimi_default();
  ground.run_id = "ground";
  ground.preparation.kind = PreparationKind::ground;
  RunConfig coherent = RunConfig::husimi_default();
  coherent.run_id = "coherent";
  const std::vector<ResultBundle> bundles = {run(ground), run(coherent)};
  const std::string csv = cross_section_csv(bundles);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCrossSectionHeader);
  EXPECT_NE(csv.find("\nground,"), std::string::npos);
  EXPECT_NE(csv.find("\ncoherent,"), std::string::npos);
}

TEST(Emit, SummaryCarriesNormalizationAndMetadata) {
  const ResultBundle b = run(small(RunConfig::wigner_default()));
  const nlohmann::json j = summary_json(b);
  ASSERT_TRUE(j.contains("normalization"));
  for (const char* k : {"value", "upper", "lower", "ordered"}) EXPECT_TRUE(j["normalization"].contains(k)) << k;
  EXPECT_EQ(j["version"], version());
  EXPECT_TRUE(j.contains("warnings"));
  EXPECT_EQ(j["run_id"], b.config.run_id);
}

TEST(Emit, IoFailuresNamePath) {
  try {
    read_samples_csv("/nonexistent/dir/samples.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/dir/samples.csv");
  }
  EXPECT_THROW(write_text("/proc/phasetomo/x.txt", "x"), IoError);
}

TEST(Compare, ExactBundlesPass) {
  for (RunConfig c : {small(RunConfig::husimi_default()), small(RunConfig::wigner_default())}) {
    const CompareReport r = compare(run(c));
    EXPECT_TRUE(r.pass) << r.to_text();
    for (const auto& check : r.checks) EXPECT_TRUE(check.pass) << check.name;
  }
  RunConfig full = small(RunConfig::wigner_default());
  full.scan.bound_dim = 64;
  const CompareReport r = compare(run(full));
  EXPECT_TRUE(r.pass);
  bool strict = false;
  for (const auto& check : r.checks)
    if (check.tolerance == 1e-8) strict = true;
  EXPECT_TRUE(strict) << r.to_text();
}

TEST(Compare, DetectsTamperedRows) {
  const RunConfig c = small(RunConfig::husimi_default());
  auto rows = sample_rows(run(c));
  rows[5].value += 1e-6;
  EXPECT_FALSE(compare(c, rows).pass);
}

TEST(Compare, NoiseBundleWithinThreeSigma) {
  RunConfig c = RunConfig::wigner_default();
  c.noise.enabled = true;
  c.noise.atom_count = 2000;
  const CompareReport r = compare(run(c));
  EXPECT_TRUE(r.noise);
  EXPECT_GE(r.within_three_sigma, 0.99);
  EXPECT_TRUE(r.pass) << r.to_text();
}

TEST(Compare, FromDirectory) {
  const fs::path dir = scratch("compare");
  write_bundle(run(small(RunConfig::wigner_default())), dir);
  EXPECT_TRUE(compare_directory(dir).pass);
  EXPECT_THROW(compare_directory(dir / "missing"), IoError);
  fs::remove_all(dir);
}
