#pragma once

// Truncated Fock-space algebra for a single motional mode: states, the
// displacement and rotation operators, and direct evaluation of the Husimi
// and Wigner quasi-probability distributions from a density matrix.
//
// Quasi-probabilities are functions of the complex amplitude alpha with the
// 1/pi prefactor, so that  int Q d^2alpha = 1  and  int W d^2alpha = 1/2.
// Physical phase-space densities follow by dividing by hbar.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace phasetomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHbar = 1.054571817e-34;            // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg

struct FockVector {
  CVector amplitudes;
  // 1 - sum |c_n|^2 of the untruncated state, for states built as normalized.
  double truncation_loss = 0.0;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
};

// Hermitian, positive semidefinite, trace <= 1. Construction validates and
// then symmetrizes, so the stored matrix is exactly Hermitian.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix elements);

  static DensityMatrix pure(const FockVector& state);
  static DensityMatrix diagonal(std::span<const double> populations, int dim);

  const CMatrix& elements() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }
  double trace() const { return rho_.diagonal().real().sum(); }
  // 1 - trace: population removed by lossy channels.
  double trace_deficit() const { return 1.0 - trace(); }
  double population(int n) const;
  double min_eigenvalue() const;

  // Zero-padded (larger dim) or truncated (smaller dim) copy.
  DensityMatrix resized(int dim) const;
  // Copy rescaled to unit trace; throws if the trace vanished.
  DensityMatrix renormalized() const;

  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kPositivityTol = 1e-9;

 private:
  CMatrix rho_;
};

class OscillatorSpec {
 public:
  OscillatorSpec(double mass, double omega);

  double mass() const { return mass_; }
  double omega() const { return omega_; }
  double x0() const { return x0_; }  // sqrt(hbar / 2 m omega)
  double p0() const { return p0_; }  // sqrt(m hbar omega / 2)

 private:
  double mass_;
  double omega_;
  double x0_;
  double p0_;
};

// A phase-space point. x = 2 x0 Re(alpha), p = 2 p0 Im(alpha).
struct PhasePoint {
  Complex alpha{};

  static PhasePoint polar(double magnitude, double angle) { return {std::polar(magnitude, angle)}; }
  static PhasePoint physical(double x, double p, const OscillatorSpec& spec) {
    return {Complex(x / (2.0 * spec.x0()), p / (2.0 * spec.p0()))};
  }
  double x(const OscillatorSpec& spec) const { return 2.0 * spec.x0() * alpha.real(); }
  double p(const OscillatorSpec& spec) const { return 2.0 * spec.p0() * alpha.imag(); }
};

FockVector make_coherent(Complex beta, int dim);

// Lowering operator a with a|n> = sqrt(n)|n-1>.
CMatrix lowering_operator(int dim);

// exp(alpha a^dag - alpha^* a) on the truncated space. Exactly unitary; the
// entries differ from the infinite-dimensional operator only near the cutoff.
CMatrix displacement_matrix(Complex alpha, int dim);

// diag(exp(-i n theta)).
CVector rotation_phases(double theta, int dim);
CMatrix rotation_matrix(double theta, int dim);

inline constexpr int kMaxWorkingDimension = 1024;

// Dimension used internally when displacing a state of dimension `dim` by
// |alpha|: dim + ceil(4|alpha|^2 + 8|alpha| + 12). Throws NumericalFailure
// above kMaxWorkingDimension.
int working_dimension(int dim, double alpha_magnitude);

double husimi_point(const DensityMatrix& rho, PhasePoint point);

// (1/pi) sum_n (-1)^n <n| D^dag(alpha) rho D(alpha) |n>.
double wigner_point_parity(const DensityMatrix& rho, PhasePoint point);

struct WignerQuadrature {
  int nodes = 256;
  double tolerance = 1e-6;  // allowed disagreement between nodes and 2*nodes
};

// Direct quadrature of  (1/pi) int <x+q|rho|x-q> exp(-2ipq/hbar) dq,  scaled
// to the same dimensionless convention as wigner_point_parity. Throws
// NumericalFailure if the refined rule disagrees by more than the tolerance.
double wigner_point_integral(const DensityMatrix& rho, double x, double p,
                             const OscillatorSpec& spec, const WignerQuadrature& quad = {});

// Hermite functions h_0..h_{count-1} at xi (unit-width oscillator), by the
// normalized three-term recurrence.
void hermite_functions(double xi, std::span<double> out);

// Position density |<x|n>|^2 in 1/m for the oscillator `spec`.
double number_state_position_density(int n, double x, const OscillatorSpec& spec);

// W sampled on a rectangular physical grid; values use the dimensionless
// convention (rows follow x, columns follow p).
struct WignerGrid {
  std::vector<double> x;  // m
  std::vector<double> p;  // kg m / s
  Eigen::MatrixXd values;
};

struct PositionMarginal {
  std::vector<double> x;        // m
  std::vector<double> density;  // 1/m
  double truncation_estimate = 0.0;
  bool warning = false;
};

// P(x) = int W(x,p) dp by trapezoid over the p samples.
PositionMarginal marginal_x(const WignerGrid& grid, const OscillatorSpec& spec);

}  // namespace phasetomo
