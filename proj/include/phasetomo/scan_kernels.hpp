#pragma once

// Per-point scan kernels. Every grid point is independent; the serial loops
// are the reference the OpenMP versions are tested against bit-for-bit.

#include <span>
#include <vector>

#include "phasetomo/oscillator.hpp"
#include "phasetomo/tomography.hpp"

namespace phasetomo::kernels {

struct ScanContext {
  CMatrix rho;                                // dim x dim
  std::vector<CMatrix> displacement_rows;     // per shift: top `dim` rows of D(|alpha|)
  std::vector<double> alpha;                  // per shift
  std::vector<double> level_phase_rate;       // phase of level n per unit rotation angle
  double angle_scale = 1.0;                   // rotation angle applied per grid angle
  int resolved_levels = 2;
};

// Builds the context for `rho` scanned with oscillator `spec`. The level
// phases are n for harmonic rotation or (E_n - E_0)/(hbar omega) otherwise.
ScanContext make_context(const DensityMatrix& rho, const OscillatorSpec& spec, const ScanGrid& grid,
                         int resolved_levels, const ScanOptions& options);

// Fills populations of record k (index/alpha/theta must already be set).
void compute_point(const ScanContext& ctx, const ScanGrid& grid, std::size_t k, PopulationRecord& record);

void scan_serial(const ScanContext& ctx, const ScanGrid& grid, std::span<PopulationRecord> records);
void scan_omp(const ScanContext& ctx, const ScanGrid& grid, std::span<PopulationRecord> records, int threads);

void shot_noise_serial(std::span<PopulationRecord> records, const NoiseOptions& noise);
void shot_noise_omp(std::span<PopulationRecord> records, const NoiseOptions& noise, int threads);

// W on a rectangular (x, p) grid by the displaced-parity formula.
WignerGrid wigner_grid_serial(const DensityMatrix& rho, const OscillatorSpec& spec, std::span<const double> x,
                              std::span<const double> p);
WignerGrid wigner_grid_omp(const DensityMatrix& rho, const OscillatorSpec& spec, std::span<const double> x,
                           std::span<const double> p, int threads);

}  // namespace phasetomo::kernels
