#include "phasetomo/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "phasetomo/errors.hpp"
#include "phasetomo/quadrature.hpp"

namespace phasetomo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dimension(int dim, const char* where) {
  if (dim < 1) throw std::invalid_argument(std::string(where) + ": invalid dimension " + std::to_string(dim));
}

// i^k for integer k.
Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

// ----------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(CMatrix elements) : rho_(std::move(elements)) {
  if (rho_.rows() < 1 || rho_.rows() != rho_.cols())
    throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol)
    throw std::invalid_argument("DensityMatrix: not Hermitian (max |rho - rho^dag| = " + std::to_string(asym) + ")");
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  const double tr = trace();
  if (tr > 1.0 + kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " exceeds 1");
  if (min_eigenvalue() < -kPositivityTol)
    throw std::invalid_argument("DensityMatrix: not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const FockVector& state) {
  return DensityMatrix(state.amplitudes * state.amplitudes.adjoint());
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations, int dim) {
  require_dimension(dim, "DensityMatrix::diagonal");
  if (static_cast<int>(populations.size()) > dim)
    throw std::invalid_argument("DensityMatrix::diagonal: more populations than dimension");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (std::size_t n = 0; n < populations.size(); ++n) {
    if (populations[n] < 0.0) throw std::invalid_argument("DensityMatrix::diagonal: negative population");
    m(n, n) = populations[n];
  }
  return DensityMatrix(std::move(m));
}

double DensityMatrix::population(int n) const {
  if (n < 0 || n >= dim()) return 0.0;
  return rho_(n, n).real();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::resized(int dim) const {
  require_dimension(dim, "DensityMatrix::resized");
  CMatrix m = CMatrix::Zero(dim, dim);
  const int keep = std::min(dim, this->dim());
  m.topLeftCorner(keep, keep) = rho_.topLeftCorner(keep, keep);
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::renormalized() const {
  const double tr = trace();
  if (!(tr > 0.0)) throw NumericalFailure("DensityMatrix::renormalized: trace vanished");
  return DensityMatrix(rho_ / tr);
}

// ----------------------------------------------------------------------------
// OscillatorSpec

OscillatorSpec::OscillatorSpec(double mass, double omega) : mass_(mass), omega_(omega) {
  if (!(mass > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("OscillatorSpec: mass and omega must be positive");
  x0_ = std::sqrt(kHbar / (2.0 * mass * omega));
  p0_ = std::sqrt(mass * kHbar * omega / 2.0);
}

// ----------------------------------------------------------------------------
// States and operators

FockVector make_coherent(Complex beta, int dim) {
  require_dimension(dim, "make_coherent");
  FockVector state;
  state.amplitudes.resize(dim);
  state.amplitudes(0) = std::exp(-0.5 * std::norm(beta));
  for (int n = 1; n < dim; ++n) state.amplitudes(n) = state.amplitudes(n - 1) * beta / std::sqrt(double(n));
  state.truncation_loss = std::max(0.0, 1.0 - state.norm_squared());
  return state;
}

CMatrix lowering_operator(int dim) {
  require_dimension(dim, "lowering_operator");
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

CMatrix displacement_matrix(Complex alpha, int dim) {
  require_dimension(dim, "displacement_matrix");
  const double r = std::abs(alpha);
  if (r == 0.0 || dim == 1) return CMatrix::Identity(dim, dim);

  // a^dag - a = i P^dag (a + a^dag) P with P = diag(i^n), and a + a^dag is
  // real symmetric tridiagonal, so D(r) = P^dag V exp(i r L) V^T P.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sub(dim - 1);
  for (int n = 1; n < dim; ++n) sub(n - 1) = std::sqrt(double(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalFailure("displacement_matrix: eigensolver failed");

  const Eigen::MatrixXd& v = solver.eigenvectors();
  CVector phase(dim);
  for (int k = 0; k < dim; ++k) phase(k) = std::polar(1.0, r * solver.eigenvalues()(k));
  CMatrix d = v.cast<Complex>() * phase.asDiagonal() * v.transpose().cast<Complex>();

  // D(r e^{i phi}) = R(-phi) D(r) R(phi):  entry (m,n) picks up e^{i (m-n) phi}.
  const double phi = std::arg(alpha);
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) d(m, n) *= i_power(n - m) * std::polar(1.0, (m - n) * phi);
  return d;
}

CVector rotation_phases(double theta, int dim) {
  require_dimension(dim, "rotation_phases");
  CVector phases(dim);
  for (int n = 0; n < dim; ++n) phases(n) = std::polar(1.0, -n * theta);
  return phases;
}

CMatrix rotation_matrix(double theta, int dim) {
  return rotation_phases(theta, dim).asDiagonal();
}

int working_dimension(int dim, double alpha_magnitude) {
  const double extra = std::ceil(4.0 * alpha_magnitude * alpha_magnitude + 8.0 * alpha_magnitude + 12.0);
  if (!(dim + extra <= kMaxWorkingDimension))
    throw NumericalFailure("|alpha| = " + std::to_string(alpha_magnitude) + " needs more than " +
                           std::to_string(kMaxWorkingDimension) + " Fock levels");
  return dim + static_cast<int>(extra);
}

// ----------------------------------------------------------------------------
// Direct quasi-probability evaluation

double husimi_point(const DensityMatrix& rho, PhasePoint point) {
  const CVector c = make_coherent(point.alpha, rho.dim()).amplitudes;
  const double q = (c.adjoint() * rho.elements() * c)(0, 0).real() / kPi;
  return std::max(0.0, q);
}

double wigner_point_parity(const DensityMatrix& rho, PhasePoint point) {
  const int n = rho.dim();
  const int work = working_dimension(n, std::abs(point.alpha));
  const CMatrix d = displacement_matrix(point.alpha, work).topRows(n);
  const CMatrix rd = rho.elements() * d;
  double sum = 0.0;
  for (int k = 0; k < work; ++k) {
    const double pk = d.col(k).dot(rd.col(k)).real();
    sum += (k % 2 == 0) ? pk : -pk;
  }
  return sum / kPi;
}

void hermite_functions(double xi, std::span<double> out) {
  if (out.empty()) return;
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  if (out.size() > 1) out[1] = std::sqrt(2.0) * xi * out[0];
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    out[n + 1] = std::sqrt(2.0 / (n + 1.0)) * xi * out[n] - std::sqrt(double(n) / (n + 1.0)) * out[n - 1];
  }
}

double number_state_position_density(int n, double x, const OscillatorSpec& spec) {
  if (n < 0) throw std::invalid_argument("number_state_position_density: negative level");
  std::vector<double> h(n + 1);
  const double scale = std::sqrt(2.0) * spec.x0();
  hermite_functions(x / scale, h);
  return h[n] * h[n] / scale;
}

namespace {

// In units xi = x / (sqrt(2) x0), eta = p / (sqrt(2) p0):
//   W = (1/pi) int sum_mn rho_mn h_m(xi + s) h_n(xi - s) exp(-2 i eta s) ds.
double wigner_integral_rule(const CMatrix& rho, double xi, double eta, double half_width,
                            const GaussLegendreRule& rule) {
  const int n = static_cast<int>(rho.rows());
  std::vector<double> hu(n), hv(n);
  Eigen::VectorXcd u(n), v(n);
  Complex total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double s = half_width * rule.nodes[k];
    hermite_functions(xi + s, hu);
    hermite_functions(xi - s, hv);
    for (int m = 0; m < n; ++m) {
      u(m) = hu[m];
      v(m) = hv[m];
    }
    const Complex kernel = u.transpose() * rho * v;
    total += rule.weights[k] * kernel * std::polar(1.0, -2.0 * eta * s);
  }
  return (total * half_width).real() / kPi;
}

}  // namespace

double wigner_point_integral(const DensityMatrix& rho, double x, double p, const OscillatorSpec& spec,
                             const WignerQuadrature& quad) {
  const double xi = x / (std::sqrt(2.0) * spec.x0());
  const double eta = p / (std::sqrt(2.0) * spec.p0());
  const double half_width = std::sqrt(2.0 * rho.dim() + 1.0) + 8.0;
  const double coarse = wigner_integral_rule(rho.elements(), xi, eta, half_width, gauss_legendre(quad.nodes));
  const double fine = wigner_integral_rule(rho.elements(), xi, eta, half_width, gauss_legendre(2 * quad.nodes));
  if (std::abs(fine - coarse) > quad.tolerance) {
    throw NumericalFailure("wigner_point_integral: quadrature did not converge (refinement changed result by " +
                           std::to_string(std::abs(fine - coarse)) + ")");
  }
  return fine;
}

PositionMarginal marginal_x(const WignerGrid& grid, const OscillatorSpec& spec) {
  if (grid.values.rows() != static_cast<Eigen::Index>(grid.x.size()) ||
      grid.values.cols() != static_cast<Eigen::Index>(grid.p.size()))
    throw std::invalid_argument("marginal_x: grid shape mismatch");
  PositionMarginal out;
  out.x = grid.x;
  out.density.resize(grid.x.size());
  if (grid.p.size() < 2) throw std::invalid_argument("marginal_x: need at least two p samples");

  const double p_first = grid.p.front();
  const double p_last = grid.p.back();
  const double width = spec.p0();
  double max_row = 0.0;
  double max_tail = 0.0;
  std::vector<double> row(grid.p.size());
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    for (std::size_t j = 0; j < grid.p.size(); ++j) row[j] = grid.values(i, j);
    const double integral = trapezoid(grid.p, row);
    out.density[i] = integral / kHbar;
    max_row = std::max(max_row, std::abs(integral));
    // Gaussian-tail estimate of what lies beyond each p edge.
    const double tail = std::abs(row.front()) * width * width / std::max(std::abs(p_first), width) +
                        std::abs(row.back()) * width * width / std::max(std::abs(p_last), width);
    max_tail = std::max(max_tail, tail);
  }
  out.truncation_estimate = max_row > 0.0 ? max_tail / max_row : 0.0;
  const bool narrow = p_first > -5.0 * width || p_last < 5.0 * width || grid.p.size() < 64;
  out.warning = narrow || out.truncation_estimate > 1e-3;
  return out;
}

}  // namespace phasetomo
