#pragma once

// One-dimensional optical lattice: geometry, recoil/depth/frequency relations,
// and a finite-difference solver for the levels of a single well.

#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasetomo/oscillator.hpp"

namespace phasetomo {

// Defaults for 85Rb on the D2 F=3 -> F'=4 line.
struct AtomicConstants {
  double mass = 84.911789738 * kAtomicMassUnit;     // kg
  double linewidth = 2.0 * std::numbers::pi * 6.0666e6;  // Gamma, rad/s
  double saturation_intensity = 16.0;              // W/m^2 (1.6 mW/cm^2)
};

// k_L = (2 pi / lambda) sin(gamma / 2).
double lattice_vector(double wavelength, double intersection_angle);

// E_r = hbar^2 k_L^2 / 2m.
double recoil_energy(double k_lattice, double mass);

// omega = (4 k_L / pi) sqrt(U0 / m).
double well_frequency(double depth, double mass, double k_lattice);
// Inverse of well_frequency for the depth.
double depth_for_frequency(double omega, double mass, double k_lattice);

// U0 = I0 hbar Gamma^2 / (4 Delta I_sat); sign follows the detuning.
double depth_from_intensity(double peak_intensity, double detuning, double linewidth, double saturation_intensity);
double intensity_for_depth(double depth, double detuning, double linewidth, double saturation_intensity);

class LatticeSpec {
 public:
  LatticeSpec(double wavelength, double intersection_angle, double depth, double mass);
  static LatticeSpec in_recoil_units(double wavelength, double intersection_angle, double depth_recoil,
                                     double mass);

  double wavelength() const { return wavelength_; }
  double intersection_angle() const { return angle_; }
  double depth() const { return depth_; }  // J
  double mass() const { return mass_; }

  double k_lattice() const { return lattice_vector(wavelength_, angle_); }
  double period() const;  // a = pi / k_L
  double recoil() const { return recoil_energy(k_lattice(), mass_); }
  double depth_in_recoil() const { return depth_ / recoil(); }
  double harmonic_frequency() const { return well_frequency(depth_, mass_, k_lattice()); }

 private:
  double wavelength_;
  double angle_;
  double depth_;
  double mass_;
};

// Lattice phase shift phi moves the potential by d = a phi / 2 pi.
class PotentialShift {
 public:
  static PotentialShift from_phase(double phase, double period) { return {phase, period * phase / (2.0 * std::numbers::pi)}; }
  static PotentialShift from_displacement(double displacement, double period) {
    return {2.0 * std::numbers::pi * displacement / period, displacement};
  }
  PotentialShift() = default;

  double phase() const { return phase_; }
  double displacement() const { return displacement_; }

 private:
  PotentialShift(double phase, double displacement) : phase_(phase), displacement_(displacement) {}
  double phase_ = 0.0;
  double displacement_ = 0.0;
};

// Lowest levels of one well, V(y) = U0 sin^2(k_L y) on y in [-a/2, a/2] with
// hard walls. Energies are measured from the well minimum. Column n of
// `wavefunctions` is level n on `grid`, normalized so sum psi^2 dy = 1.
struct BoundStateBasis {
  std::vector<double> energies;  // J, ascending
  Eigen::MatrixXd wavefunctions;
  std::vector<double> grid;      // m
  double spacing = 0.0;          // m
  int bound_count = 0;           // levels with E < U0

  int level_count() const { return static_cast<int>(energies.size()); }
};

BoundStateBasis solve_bound_states(const LatticeSpec& spec, int grid_size = 1024, int level_count = 32);

// c_n -> c_n exp(-i E_n t / hbar).
CVector evolve_in_well(const CVector& coefficients, std::span<const double> energies, double t);

struct ShiftedHamiltonian {
  CMatrix matrix;                  // <psi_i| T + U0 sin^2(k_L (y - d)) |psi_j>, J
  std::vector<double> leakage;     // per bound level of the unshifted well
  int shifted_bound_count = 0;
};

ShiftedHamiltonian shifted_hamiltonian_matrix(const LatticeSpec& spec, const BoundStateBasis& basis,
                                              const PotentialShift& shift);

}  // namespace phasetomo
