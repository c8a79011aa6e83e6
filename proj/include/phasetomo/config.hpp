#pragma once

// Run configuration: one YAML document describes one experiment. Dimensioned
// values are strings with explicit units; see units.hpp.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasetomo/lattice.hpp"
#include "phasetomo/state_prep.hpp"
#include "phasetomo/tomography.hpp"
#include "phasetomo/units.hpp"

namespace phasetomo {

struct LatticeSection {
  double wavelength = 780e-9;             // m
  double intersection_angle = 49.6 * std::numbers::pi / 180.0;  // rad
  units::Quantity depth{37.0, true};
  double mass = AtomicConstants{}.mass;   // kg

  bool operator==(const LatticeSection&) const = default;
};

struct OscillatorSection {
  std::optional<double> omega;  // rad/s; unset: harmonic frequency of the lattice well
  int dim = 8;                  // Fock dimension of the prepared state

  bool operator==(const OscillatorSection&) const = default;
};

struct PreparationSection {
  PreparationKind kind = PreparationKind::ground;
  double contamination = 0.10;
  double shift = 0.0;            // rad when shift_is_phase, else m
  bool shift_is_phase = true;
  double hold_time = 0.0;        // s
  std::vector<double> populations;
  bool finite_depth = true;
  PipelineModel model = PipelineModel::lattice;
  // ground / explicit: number states of an oscillator with this ground width,
  // re-expressed in the basis of the scan oscillator.
  std::optional<double> ground_width;  // m

  bool operator==(const PreparationSection&) const = default;
};

struct ScanSection {
  ScanMode mode = ScanMode::husimi;
  int angle_count = 27;
  double angle_span = 2.0 * std::numbers::pi;  // rad
  int displacement_count = 19;
  double displacement_step = 25.8e-9;  // m
  int bound_dim = 2;
  RotationModel rotation = RotationModel::harmonic;
  bool ensemble = false;         // Husimi only: average over the dephasing model

  bool operator==(const ScanSection&) const = default;
};

struct DephasingSection {
  double relative_spread = 0.4;
  double truncation_sigmas = 2.0;
  int samples = 101;

  bool operator==(const DephasingSection&) const = default;
};

struct NoiseSection {
  bool enabled = false;
  long atom_count = 1000;
  std::uint64_t seed = 1;
  int repetitions = 1;

  bool operator==(const NoiseSection&) const = default;
};

struct ExecutionSection {
  bool parallel = true;
  int threads = 0;

  bool operator==(const ExecutionSection&) const = default;
};

struct RunConfig {
  std::string run_id = "run";
  LatticeSection lattice;
  OscillatorSection oscillator;
  PreparationSection preparation;
  ScanSection scan;
  DephasingSection dephasing;
  NoiseSection noise;
  ExecutionSection execution;
  std::string output_directory = "out";

  bool operator==(const RunConfig&) const = default;

  // 37 E_r near-coherent Husimi run and the two-bound-state Wigner run on
  // the 0.3/0.7 inverted reference.
  static RunConfig husimi_default();
  static RunConfig wigner_default();

  // Throws ConfigError naming the offending key.
  void validate() const;

  LatticeSpec lattice_spec() const;
  OscillatorSpec oscillator_spec(const LatticeSpec& lattice) const;
  ScanGrid grid() const;
  PreparationConfig preparation_config(const LatticeSpec& lattice) const;
  DephasingModel dephasing_model(double mean_omega) const;
  ScanOptions scan_options(const BoundStateBasis* basis) const;
};

// Missing sections and keys take the defaults of RunConfig (not the reference
// presets); unknown keys are rejected. Errors carry line/column when they
// point at a node of the document.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

// Sets a dotted key (e.g. "scan.displacement_step") in the document to the
// given scalar text and re-parses it.
RunConfig with_override(const RunConfig& config, std::string_view dotted_key, std::string_view value);

}  // namespace phasetomo
