#pragma once

// Re-evaluates emitted samples against direct oscillator-core evaluation.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "phasetomo/config.hpp"
#include "phasetomo/emit.hpp"
#include "phasetomo/run.hpp"

namespace phasetomo {

struct TableCheck {
  std::string name;
  std::size_t points = 0;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;  // 0: informational only
  bool pass = true;
};

struct CompareReport {
  std::vector<TableCheck> checks;
  bool noise = false;
  // Fraction of sampled populations within 3 binomial standard errors of the
  // exact ones (noise bundles only).
  double within_three_sigma = 1.0;
  bool pass = true;

  std::string to_text() const;
};

// Exact bundles: Husimi values vs husimi_point (1e-10, ensemble-averaged for
// ensemble scans); Wigner values vs wigner_point_parity (1e-8 when no
// population is unresolved, otherwise the parity value must lie inside the
// bounds); population conservation (1e-9). Noise bundles: populations vs a
// rerun of the config in exact mode, at least 99% within 3 sigma.
CompareReport compare(const RunConfig& config, std::span<const SampleRow> rows);
CompareReport compare(const ResultBundle& bundle);
// Reads config.yaml and samples.csv from a bundle directory.
CompareReport compare_directory(const std::filesystem::path& directory);

}  // namespace phasetomo
