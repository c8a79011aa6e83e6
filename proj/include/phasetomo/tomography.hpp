#pragma once

// Rotation / displacement / population-readout protocol and the estimators
// built on its records: Husimi samples, the two-level Wigner estimate with its
// loss bounds, width inference from normalization, and Gaussian fits.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasetomo/errors.hpp"
#include "phasetomo/lattice.hpp"
#include "phasetomo/oscillator.hpp"
#include "phasetomo/state_prep.hpp"

namespace phasetomo {

enum class ScanMode { husimi, wigner };
enum class RotationModel { harmonic, realistic };
enum class Execution { serial, parallel };

// Polar measurement grid. Point k = angle_index * displacements.size() + displacement_index.
struct ScanGrid {
  std::vector<double> angles;         // rad, strictly increasing within [0, 2 pi]
  std::vector<double> displacements;  // m, non-negative, strictly increasing
  ScanMode mode = ScanMode::husimi;

  // `angle_count` angles evenly covering [0, angle_span] (both ends included)
  // and displacements 0, step, 2 step, ...
  static ScanGrid uniform(ScanMode mode, int angle_count, double angle_span, int displacement_count,
                          double displacement_step);
  static ScanGrid husimi_default();  // 27 angles x 19 shifts of 25.8 nm
  static ScanGrid wigner_default();  // 41 angles x 19 shifts of 25.8 nm

  void validate() const;
  std::size_t size() const { return angles.size() * displacements.size(); }
  std::size_t index(std::size_t angle_i, std::size_t displacement_i) const {
    return angle_i * displacements.size() + displacement_i;
  }
};

struct PopulationRecord {
  std::size_t index = 0;
  double alpha_abs = 0.0;
  double theta = 0.0;
  double displacement = 0.0;  // m
  double p0 = 0.0;
  double p1 = 0.0;
  double p_lost = 0.0;  // n >= 2, i.e. everything not bound in a two-level lattice
  // Separately resolved populations of n = 2, 3, ... when the readout
  // distinguishes more than two levels. They are part of p_lost.
  std::vector<double> higher_levels;
  bool shot_sampled = false;
  long atom_count = 0;

  double unresolved() const;
};

struct QuasiDistributionSample {
  std::size_t index = 0;
  double alpha_abs = 0.0;
  double theta = 0.0;
  double displacement = 0.0;
  double value = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.0;  // rms width, same units as the positions
  double residual_norm = 0.0;
  int iterations = 0;
};

class FitFailure : public NumericalFailure {
 public:
  FitFailure(const std::string& what, double residual_norm)
      : NumericalFailure(what), residual_norm_(residual_norm) {}
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double residual_norm_;
};

struct NoiseOptions {
  long atom_count = 1000;
  std::uint64_t seed = 1;
  int repetitions = 1;  // repeated shots per point are pooled
};

struct ScanOptions {
  RotationModel rotation = RotationModel::harmonic;
  const BoundStateBasis* basis = nullptr;  // required for realistic rotation
  Execution execution = Execution::parallel;
  int threads = 0;  // 0: OpenMP default
  std::optional<NoiseOptions> noise;
};

struct HusimiScan {
  std::vector<PopulationRecord> records;
  std::vector<QuasiDistributionSample> samples;
};

// Q(|alpha|, theta) = p(0 | alpha) / pi after rotation by theta and
// displacement by |alpha| = x / 2 x0.
HusimiScan run_husimi_scan(const DensityMatrix& rho, const OscillatorSpec& spec, const ScanGrid& grid,
                           const ScanOptions& options = {});

// Husimi scan of an ensemble of wells whose frequencies follow `dephasing`.
// Every well sees the same physical displacement and wait time theta / omega.
HusimiScan run_ensemble_husimi_scan(const DensityMatrix& rho, const OscillatorSpec& mean_spec,
                                    const DephasingModel& dephasing, const ScanGrid& grid,
                                    const ScanOptions& options = {});

// Populations after rotation and displacement. Levels n < bound_dim are
// resolved; the rest is lumped into the unresolved remainder.
std::vector<PopulationRecord> run_wigner_scan(const DensityMatrix& rho, const OscillatorSpec& spec,
                                              const ScanGrid& grid, int bound_dim,
                                              const ScanOptions& options = {});

QuasiDistributionSample husimi_sample(const PopulationRecord& record);

// value = (1/pi) sum_n (-1)^n p_n over resolved levels; the bounds add or
// subtract the unresolved remainder (all of it in an even or an odd level).
QuasiDistributionSample estimate_wigner(const PopulationRecord& record);
std::vector<QuasiDistributionSample> estimate_wigner(std::span<const PopulationRecord> records);

// Multinomial resampling of the record's level populations. The stream
// depends only on (seed, record.index).
PopulationRecord sample_shot_noise(const PopulationRecord& record, long atom_count, std::uint64_t seed);

struct XrmsEstimate {
  double x_rms = 0.0;        // m
  double edge_ratio = 0.0;   // ring-averaged Q at the largest shift / peak
  bool extrapolated = false; // Gaussian tail added beyond the grid
};

// Solves  int Q(r / 2 x_rms, theta) r / (4 x_rms^2) dr dtheta = 1  for x_rms.
XrmsEstimate infer_xrms_from_normalization(std::span<const QuasiDistributionSample> samples,
                                           const ScanGrid& grid);

// amplitude * exp(-(r - center)^2 / 2 width^2) by Levenberg-Marquardt.
GaussianFit fit_gaussian_cross_section(std::span<const double> positions, std::span<const double> values);

struct NormalizationReport {
  double value = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  bool ordered = false;  // lower <= value <= upper
};

// 2 * int W d^2 alpha for the estimate and both bounds (1 for a complete,
// trace-1 Wigner function).
NormalizationReport normalization_report(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid);

// Cut through the origin along `angle` and angle + pi. Positions are signed
// physical displacements (m), ascending.
struct CrossSection {
  double angle = 0.0;
  std::vector<double> position;
  std::vector<double> value;
  std::vector<double> upper;
  std::vector<double> lower;
};

CrossSection cross_section(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid, double angle);

// Largest `value`; ties resolve to the lowest index.
const QuasiDistributionSample& max_sample(std::span<const QuasiDistributionSample> samples);

// Bilinear interpolation in (|alpha|, theta) of the sample values onto a
// Cartesian grid in alpha. Points beyond the largest |alpha| are left at 0
// and counted. `interpolation_error` is the bilinear bound
// (h_r^2 max|f_rr| + h_t^2 max|f_tt|) / 8 from second differences.
struct CartesianResample {
  std::vector<double> re_alpha;
  std::vector<double> im_alpha;
  Eigen::MatrixXd values;  // rows follow re_alpha
  double interpolation_error = 0.0;
  std::size_t outside = 0;
};

CartesianResample resample_cartesian(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid,
                                     std::span<const double> re_alpha, std::span<const double> im_alpha);

}  // namespace phasetomo
