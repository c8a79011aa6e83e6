#pragma once

// End-to-end orchestration: preparation -> scan -> estimators -> fits ->
// reports, collected in a ResultBundle.

#include <optional>
#include <string>
#include <vector>

#include "phasetomo/config.hpp"
#include "phasetomo/lattice.hpp"
#include "phasetomo/oscillator.hpp"
#include "phasetomo/tomography.hpp"

namespace phasetomo {

std::string version();

// Lattice, oscillator and prepared state of a config, before any scanning.
struct PreparedRun {
  LatticeSpec lattice;
  BoundStateBasis basis;
  OscillatorSpec spec;
  DensityMatrix rho;
  double loss = 0.0;
  std::vector<std::string> warnings;
};

PreparedRun prepare_run(const RunConfig& config);

struct LabeledCut {
  std::string label;
  CrossSection cut;
};

struct FitRecord {
  std::string label;
  double angle = 0.0;     // rad, direction of the cut
  GaussianFit fit;        // positions in m
  double center_x = 0.0;  // fit center in the phase plane, m along x and p directions
  double center_p = 0.0;
};

struct ResultBundle {
  RunConfig config;
  std::string config_echo;
  std::string version;
  ScanGrid grid;
  double omega = 0.0;  // rad/s
  double x0 = 0.0;     // m
  int bound_count = 0;
  double preparation_loss = 0.0;
  DensityMatrix rho;

  std::vector<PopulationRecord> records;
  std::vector<QuasiDistributionSample> samples;
  std::vector<LabeledCut> cuts;
  std::vector<FitRecord> fits;
  std::optional<NormalizationReport> normalization;
  std::optional<XrmsEstimate> xrms;
  std::optional<QuasiDistributionSample> peak;
  std::vector<std::string> warnings;

  // Appends unless the same text was already recorded.
  void warn(const std::string& message);
};

// Errors from inner modules are rethrown with the failing stage prefixed.
ResultBundle run(const RunConfig& config);

}  // namespace phasetomo
