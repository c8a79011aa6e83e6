#include "phasetomo/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include "phasetomo/errors.hpp"

namespace phasetomo {

namespace {
constexpr double kPi = std::numbers::pi;
}

double lattice_vector(double wavelength, double intersection_angle) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("lattice_vector: wavelength must be positive");
  if (!(intersection_angle > 0.0) || intersection_angle > kPi)
    throw std::invalid_argument("lattice_vector: intersection angle must lie in (0, pi]");
  return 2.0 * kPi / wavelength * std::sin(0.5 * intersection_angle);
}

double recoil_energy(double k_lattice, double mass) {
  if (!(k_lattice > 0.0) || !(mass > 0.0)) throw std::invalid_argument("recoil_energy: inputs must be positive");
  return kHbar * kHbar * k_lattice * k_lattice / (2.0 * mass);
}

double well_frequency(double depth, double mass, double k_lattice) {
  if (!(depth > 0.0) || !(mass > 0.0) || !(k_lattice > 0.0))
    throw std::invalid_argument("well_frequency: inputs must be positive");
  return 4.0 * k_lattice / kPi * std::sqrt(depth / mass);
}

double depth_for_frequency(double omega, double mass, double k_lattice) {
  if (!(omega > 0.0) || !(mass > 0.0) || !(k_lattice > 0.0))
    throw std::invalid_argument("depth_for_frequency: inputs must be positive");
  const double root = omega * kPi / (4.0 * k_lattice);
  return mass * root * root;
}

double depth_from_intensity(double peak_intensity, double detuning, double linewidth, double saturation_intensity) {
  if (detuning == 0.0) throw std::invalid_argument("depth_from_intensity: zero detuning");
  if (!(saturation_intensity > 0.0)) throw std::invalid_argument("depth_from_intensity: I_sat must be positive");
  return peak_intensity * kHbar * linewidth * linewidth / (4.0 * detuning * saturation_intensity);
}

double intensity_for_depth(double depth, double detuning, double linewidth, double saturation_intensity) {
  if (detuning == 0.0) throw std::invalid_argument("intensity_for_depth: zero detuning");
  if (linewidth == 0.0) throw std::invalid_argument("intensity_for_depth: zero linewidth");
  return depth * 4.0 * detuning * saturation_intensity / (kHbar * linewidth * linewidth);
}

LatticeSpec::LatticeSpec(double wavelength, double intersection_angle, double depth, double mass)
    : wavelength_(wavelength), angle_(intersection_angle), depth_(depth), mass_(mass) {
  lattice_vector(wavelength, intersection_angle);  // validates geometry
  if (!(depth > 0.0)) throw std::invalid_argument("LatticeSpec: depth must be positive");
  if (!(mass > 0.0)) throw std::invalid_argument("LatticeSpec: mass must be positive");
}

LatticeSpec LatticeSpec::in_recoil_units(double wavelength, double intersection_angle, double depth_recoil,
                                         double mass) {
  const double er = recoil_energy(lattice_vector(wavelength, intersection_angle), mass);
  return LatticeSpec(wavelength, intersection_angle, depth_recoil * er, mass);
}

double LatticeSpec::period() const { return kPi / k_lattice(); }

BoundStateBasis solve_bound_states(const LatticeSpec& spec, int grid_size, int level_count) {
  if (grid_size < 256) throw std::invalid_argument("solve_bound_states: grid_size must be >= 256");
  if (level_count < 1 || level_count > grid_size)
    throw std::invalid_argument("solve_bound_states: level_count out of range");

  const double a = spec.period();
  const double k = spec.k_lattice();
  const double u0 = spec.depth();
  const double h = a / (grid_size + 1);
  const double kinetic = kHbar * kHbar / (2.0 * spec.mass() * h * h);

  BoundStateBasis basis;
  basis.spacing = h;
  basis.grid.resize(grid_size);
  std::vector<double> diag(grid_size), off(grid_size - 1, -kinetic);
  for (int i = 0; i < grid_size; ++i) {
    const double y = -0.5 * a + h * (i + 1);
    basis.grid[i] = y;
    const double s = std::sin(k * y);
    diag[i] = 2.0 * kinetic + u0 * s * s;
  }

  // Energies are ~1e-30 J; scale to recoil units so LAPACK tolerances behave.
  const double scale = spec.recoil();
  for (auto& d : diag) d /= scale;
  for (auto& o : off) o /= scale;

  lapack_int found = 0;
  std::vector<double> w(grid_size);
  std::vector<double> z(static_cast<std::size_t>(grid_size) * level_count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(level_count));
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', grid_size, diag.data(), off.data(), 0.0, 0.0, 1, level_count,
                     0.0, &found, w.data(), z.data(), grid_size, support.data());
  if (info != 0 || found != level_count)
    throw NumericalFailure("solve_bound_states: eigensolver failed (info " + std::to_string(info) + ")");

  basis.energies.resize(level_count);
  basis.wavefunctions.resize(grid_size, level_count);
  const double norm = 1.0 / std::sqrt(h);
  for (int n = 0; n < level_count; ++n) {
    basis.energies[n] = w[n] * scale;
    // Fix sign so each level starts positive just inside the left wall.
    double sign = 1.0;
    for (int i = 0; i < grid_size; ++i) {
      const double value = z[static_cast<std::size_t>(n) * grid_size + i];
      if (std::abs(value) > 1e-8) {
        sign = value > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < grid_size; ++i)
      basis.wavefunctions(i, n) = sign * norm * z[static_cast<std::size_t>(n) * grid_size + i];
    if (basis.energies[n] < u0) ++basis.bound_count;
  }
  return basis;
}

CVector evolve_in_well(const CVector& coefficients, std::span<const double> energies, double t) {
  if (t < 0.0) throw std::invalid_argument("evolve_in_well: negative time");
  if (static_cast<std::size_t>(coefficients.size()) > energies.size())
    throw std::invalid_argument("evolve_in_well: more coefficients than levels");
  CVector out(coefficients.size());
  for (Eigen::Index n = 0; n < coefficients.size(); ++n)
    out(n) = coefficients(n) * std::polar(1.0, -energies[n] * t / kHbar);
  return out;
}

ShiftedHamiltonian shifted_hamiltonian_matrix(const LatticeSpec& spec, const BoundStateBasis& basis,
                                              const PotentialShift& shift) {
  const double a = spec.period();
  if (std::abs(shift.displacement()) >= a)
    throw std::invalid_argument("shifted_hamiltonian_matrix: |displacement| must be below one period");

  const double k = spec.k_lattice();
  const double u0 = spec.depth();
  const int levels = basis.level_count();
  const auto points = static_cast<Eigen::Index>(basis.grid.size());

  Eigen::VectorXd delta_v(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    const double y = basis.grid[i];
    const double shifted = std::sin(k * (y - shift.displacement()));
    const double unshifted = std::sin(k * y);
    delta_v(i) = u0 * (shifted * shifted - unshifted * unshifted);
  }

  const Eigen::MatrixXd& psi = basis.wavefunctions;
  Eigen::MatrixXd h = psi.transpose() * delta_v.asDiagonal() * psi * basis.spacing;
  for (int n = 0; n < levels; ++n) h(n, n) += basis.energies[n];
  h = 0.5 * (h + h.transpose()).eval();

  ShiftedHamiltonian out;
  out.matrix = h.cast<Complex>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h / spec.recoil());
  if (solver.info() != Eigen::Success) throw NumericalFailure("shifted_hamiltonian_matrix: eigensolver failed");
  const Eigen::VectorXd energies = solver.eigenvalues() * spec.recoil();
  for (int j = 0; j < levels; ++j)
    if (energies(j) < u0) ++out.shifted_bound_count;

  out.leakage.resize(basis.bound_count);
  for (int i = 0; i < basis.bound_count; ++i) {
    double retained = 0.0;
    for (int j = 0; j < out.shifted_bound_count; ++j) retained += solver.eigenvectors()(i, j) * solver.eigenvectors()(i, j);
    out.leakage[i] = 1.0 - retained;
  }
  return out;
}

}  // namespace phasetomo
