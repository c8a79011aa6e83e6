#pragma once

// Preparation pipelines for the ground, near-coherent and inverted states, and
// the frequency-inhomogeneity (dephasing) channel.

#include <string>
#include <vector>

#include "phasetomo/lattice.hpp"
#include "phasetomo/oscillator.hpp"

namespace phasetomo {

enum class PreparationKind { ground, coherent, inverted, explicit_populations };
enum class PipelineModel { lattice, harmonic };

struct PreparationConfig {
  PreparationKind kind = PreparationKind::ground;
  double contamination = 0.10;  // first-excited fraction left by the ground filter
  PotentialShift shift;         // lattice shift used by coherent and inverted preparation
  // coherent: free evolution after the shift; inverted: time held in the
  // shifted potential.
  double hold_time = 0.0;
  std::vector<double> populations;  // explicit_populations only
  bool finite_depth = true;         // truncate to the bound levels of the lattice
  PipelineModel model = PipelineModel::lattice;

  void validate() const;  // throws std::invalid_argument
};

// Gaussian distribution of well frequencies, truncated at +-truncation_sigmas
// and sampled on an even grid with trapezoid weights.
struct DephasingModel {
  double mean_omega = 0.0;          // rad/s
  double relative_spread = 0.4;     // sigma / mean
  double truncation_sigmas = 2.0;
  int sample_count = 101;

  void validate() const;
  std::vector<double> frequencies() const;
  std::vector<double> weights() const;  // sums to 1
  // sum_k w_k exp(-i omega_k tau)
  Complex characteristic(double tau) const;
};

struct PreparedState {
  DensityMatrix rho;
  double loss = 0.0;  // population discarded before renormalization
  std::vector<std::string> warnings;
};

// (1 - eps)|0><0| + eps|1><1|. The filter is modeled as adiabatic, so the
// shallow-lattice ground level maps onto the deep-lattice ground level.
DensityMatrix prepare_ground(const PreparationConfig& config, int dim = 8);

// Displaces the filtered ground state by beta = delta_x / 2 x0, truncates to
// `bound_count` levels when finite_depth is set (bound_count <= 0 disables),
// and lets it rotate for config.hold_time. Prepared states are labeled with
// the counterclockwise angle convention of the measured distributions, so a
// hold of t places the state at arg(alpha) = +omega t.
PreparedState prepare_coherent(double delta_x, const OscillatorSpec& spec, const PreparationConfig& config,
                               int bound_count, int dim = 8);

// Shift, hold, shift back, discard unbound population, then dephase until
// coherences fall below 1e-3 of the largest population.
PreparedState prepare_inverted(const LatticeSpec& lattice, const PreparationConfig& config,
                               const DephasingModel& dephasing, int dim = 8,
                               const BoundStateBasis* basis = nullptr);

DensityMatrix make_inverted_reference(double p0, double p1, int dim = 8);

// Ensemble average of free harmonic evolution over the frequency distribution.
DensityMatrix dephase(const DensityMatrix& rho, const DephasingModel& model, double t);

// Maps the state so that its phase-space portrait turns by +theta.
DensityMatrix rotate_in_phase_space(const DensityMatrix& rho, double theta);

// Re-expresses a state given in the number basis of an oscillator whose
// ground-state width is width_ratio * x0 in the number basis of width x0
// (squeeze by ln width_ratio along x), truncated to `dim` levels and
// renormalized; the discarded population is reported as loss.
PreparedState rescale_ground_width(const DensityMatrix& rho, double width_ratio, int dim);

struct WidthRatio {
  double numeric = 1.0;  // sqrt(<1/omega> omega_mean)
  double series = 1.0;   // sqrt(1 + s^2 + s^4), s = relative spread
};

WidthRatio inhomogeneous_width_ratio(const DephasingModel& model);

}  // namespace phasetomo
