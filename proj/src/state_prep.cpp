#include "phasetomo/state_prep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "phasetomo/errors.hpp"

namespace phasetomo {

void PreparationConfig::validate() const {
  if (!(contamination >= 0.0 && contamination <= 0.2))
    throw std::invalid_argument("contamination must lie in [0, 0.2]");
  if (!(hold_time >= 0.0)) throw std::invalid_argument("hold_time must be non-negative");
  if (kind == PreparationKind::explicit_populations) {
    if (populations.empty()) throw std::invalid_argument("explicit preparation needs populations");
    double sum = 0.0;
    for (double p : populations) {
      if (p < 0.0) throw std::invalid_argument("populations must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("populations must sum to 1");
  }
}

// ----------------------------------------------------------------------------
// Dephasing

void DephasingModel::validate() const {
  if (!(mean_omega > 0.0)) throw std::invalid_argument("dephasing: mean_omega must be positive");
  if (!(relative_spread >= 0.0)) throw std::invalid_argument("dephasing: spread must be non-negative");
  if (sample_count < 1) throw std::invalid_argument("dephasing: sample_count must be >= 1");
  if (!(truncation_sigmas > 0.0)) throw std::invalid_argument("dephasing: truncation must be positive");
  if (!(1.0 - truncation_sigmas * relative_spread > 0.0))
    throw std::invalid_argument("dephasing: frequency distribution reaches omega <= 0");
}

std::vector<double> DephasingModel::frequencies() const {
  if (sample_count == 1 || relative_spread == 0.0) return {mean_omega};
  std::vector<double> w(sample_count);
  const double sigma = relative_spread * mean_omega;
  for (int k = 0; k < sample_count; ++k) {
    const double z = -truncation_sigmas + 2.0 * truncation_sigmas * k / (sample_count - 1);
    w[k] = mean_omega + z * sigma;
  }
  return w;
}

std::vector<double> DephasingModel::weights() const {
  if (sample_count == 1 || relative_spread == 0.0) return {1.0};
  std::vector<double> w(sample_count);
  double total = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    const double z = -truncation_sigmas + 2.0 * truncation_sigmas * k / (sample_count - 1);
    w[k] = std::exp(-0.5 * z * z) * ((k == 0 || k == sample_count - 1) ? 0.5 : 1.0);
    total += w[k];
  }
  for (auto& x : w) x /= total;
  return w;
}

Complex DephasingModel::characteristic(double tau) const {
  const auto omega = frequencies();
  const auto w = weights();
  Complex sum = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) sum += w[k] * std::polar(1.0, -omega[k] * tau);
  return sum;
}

DensityMatrix dephase(const DensityMatrix& rho, const DephasingModel& model, double t) {
  model.validate();
  const int n = rho.dim();
  std::vector<Complex> factor(n);
  for (int d = 0; d < n; ++d) factor[d] = model.characteristic(d * t);
  CMatrix out = rho.elements();
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      out(r, c) *= r > c ? factor[r - c] : std::conj(factor[c - r]);
    }
  }
  return DensityMatrix(std::move(out));
}

WidthRatio inhomogeneous_width_ratio(const DephasingModel& model) {
  model.validate();
  if (!(model.relative_spread < 1.0)) throw std::invalid_argument("width ratio: spread must be below 1");
  const auto omega = model.frequencies();
  const auto w = model.weights();
  double inv = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    inv += w[k] / omega[k];
    mean += w[k] * omega[k];
  }
  const double s2 = model.relative_spread * model.relative_spread;
  return {std::sqrt(inv * mean), std::sqrt(1.0 + s2 + s2 * s2)};
}

// ----------------------------------------------------------------------------
// Pipelines

namespace {

CMatrix ground_mixture(double contamination, int dim) {
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(0, 0) = 1.0 - contamination;
  if (dim > 1) rho(1, 1) = contamination;
  return rho;
}

double max_coherence_ratio(const CMatrix& rho) {
  const double diag = rho.diagonal().real().maxCoeff();
  double off = 0.0;
  for (Eigen::Index c = 0; c < rho.cols(); ++c)
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
      if (r != c) off = std::max(off, std::abs(rho(r, c)));
  return diag > 0.0 ? off / diag : 0.0;
}

// Truncate to the leading block, recording the discarded population.
CMatrix keep_leading(const CMatrix& rho, int keep, double& loss) {
  const CMatrix block = rho.topLeftCorner(keep, keep);
  loss = std::max(0.0, rho.diagonal().real().sum() - block.diagonal().real().sum());
  return block;
}

}  // namespace

DensityMatrix prepare_ground(const PreparationConfig& config, int dim) {
  config.validate();
  if (dim < 2 && config.contamination > 0.0) throw std::invalid_argument("prepare_ground: dim must be >= 2");
  return DensityMatrix(ground_mixture(config.contamination, dim));
}

DensityMatrix rotate_in_phase_space(const DensityMatrix& rho, double theta) {
  // R(-theta) rho R(theta): |beta> -> |beta e^{+i theta}>.
  const CVector phases = rotation_phases(-theta, rho.dim());
  return DensityMatrix(phases.asDiagonal() * rho.elements() * phases.conjugate().asDiagonal());
}

PreparedState rescale_ground_width(const DensityMatrix& rho, double width_ratio, int dim) {
  if (!(width_ratio > 0.0) || !std::isfinite(width_ratio))
    throw std::invalid_argument("rescale_ground_width: width ratio must be positive");
  if (dim < rho.dim()) throw std::invalid_argument("rescale_ground_width: dim below the state dimension");
  const double r = std::log(width_ratio);
  const int work = dim + 16 + static_cast<int>(std::ceil(40.0 * std::abs(r)));
  const CMatrix a = lowering_operator(work);
  // S = exp(G), G = (r/2)(a^dag^2 - a^2); iG is Hermitian.
  const CMatrix a2 = a * a;
  const CMatrix h = Complex(0.0, 0.5 * r) * (a2.adjoint() - a2);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()));
  if (solver.info() != Eigen::Success) throw NumericalFailure("rescale_ground_width: eigensolver failed");
  const CVector phase = (solver.eigenvalues().cast<Complex>() * Complex(0.0, -1.0)).array().exp();
  const CMatrix squeeze = solver.eigenvectors() * phase.asDiagonal() * solver.eigenvectors().adjoint();
  const CMatrix wide = squeeze * rho.resized(work).elements() * squeeze.adjoint();
  PreparedState out;
  const CMatrix block = keep_leading(wide, dim, out.loss);
  out.rho = DensityMatrix(block).renormalized();
  return out;
}

PreparedState prepare_coherent(double delta_x, const OscillatorSpec& spec, const PreparationConfig& config,
                               int bound_count, int dim) {
  config.validate();
  const double beta = delta_x / (2.0 * spec.x0());
  const int work = working_dimension(dim, std::abs(beta));
  const CMatrix d = displacement_matrix(Complex(beta, 0.0), work);
  const CMatrix displaced = d * ground_mixture(config.contamination, work) * d.adjoint();

  const int keep = (config.finite_depth && bound_count > 0) ? std::min(bound_count, dim) : dim;
  PreparedState out;
  const CMatrix block = keep_leading(displaced, keep, out.loss);
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho.topLeftCorner(keep, keep) = block;
  out.rho = DensityMatrix(rho).renormalized();
  if (out.loss > 0.05)
    out.warnings.push_back("coherent preparation discarded " + std::to_string(out.loss) +
                           " of the population outside the retained levels");
  if (config.hold_time > 0.0) out.rho = rotate_in_phase_space(out.rho, spec.omega() * config.hold_time);
  return out;
}

PreparedState prepare_inverted(const LatticeSpec& lattice, const PreparationConfig& config,
                               const DephasingModel& dephasing, int dim, const BoundStateBasis* basis) {
  config.validate();
  BoundStateBasis owned;
  if (basis == nullptr) {
    owned = solve_bound_states(lattice);
    basis = &owned;
  }
  if (basis->bound_count < 2)
    throw std::invalid_argument("prepare_inverted: lattice supports fewer than 2 bound states");
  const int bound = basis->bound_count;
  if (dim < bound) throw std::invalid_argument("prepare_inverted: dim smaller than the bound subspace");

  CMatrix evolved;
  if (config.model == PipelineModel::lattice) {
    const int levels = basis->level_count();
    const CMatrix rho0 = ground_mixture(config.contamination, levels);
    if (config.hold_time == 0.0) {
      evolved = rho0;
    } else {
      const ShiftedHamiltonian h = shifted_hamiltonian_matrix(lattice, *basis, config.shift);
      const Eigen::MatrixXd hr = h.matrix.real() / lattice.recoil();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hr);
      if (solver.info() != Eigen::Success) throw NumericalFailure("prepare_inverted: eigensolver failed");
      const double phase_rate = lattice.recoil() * config.hold_time / kHbar;
      CVector phases(levels);
      for (int k = 0; k < levels; ++k) phases(k) = std::polar(1.0, -solver.eigenvalues()(k) * phase_rate);
      const CMatrix v = solver.eigenvectors().cast<Complex>();
      const CMatrix u = v * phases.asDiagonal() * v.adjoint();
      evolved = u * rho0 * u.adjoint();
    }
  } else {
    const OscillatorSpec osc(lattice.mass(), lattice.harmonic_frequency());
    const double beta = config.shift.displacement() / (2.0 * osc.x0());
    const int work = working_dimension(dim, 2.0 * std::abs(beta));
    const CMatrix rho0 = ground_mixture(config.contamination, work);
    // In the shifted frame the atom starts at -beta, evolves, then the shift is undone.
    const CMatrix u = displacement_matrix(Complex(beta, 0.0), work) *
                      rotation_matrix(osc.omega() * config.hold_time, work) *
                      displacement_matrix(Complex(-beta, 0.0), work);
    evolved = u * rho0 * u.adjoint();
  }

  PreparedState out;
  const CMatrix kept = keep_leading(evolved, bound, out.loss);
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho.topLeftCorner(bound, bound) = kept;
  DensityMatrix state = DensityMatrix(rho).renormalized();

  constexpr double kCoherenceLimit = 1e-3;
  if (max_coherence_ratio(state.elements()) >= kCoherenceLimit) {
    DephasingModel model = dephasing;
    model.validate();
    if (model.relative_spread == 0.0) {
      out.warnings.push_back("dephasing model has zero spread; coherences of the inverted state retained");
    } else {
      const double step = 1.0 / (model.relative_spread * model.mean_omega);
      bool done = false;
      for (int k = 1; k <= 64 && !done; ++k) {
        const DensityMatrix trial = dephase(state, model, k * step);
        if (max_coherence_ratio(trial.elements()) < kCoherenceLimit) {
          state = trial;
          done = true;
        }
      }
      if (!done) throw NumericalFailure("prepare_inverted: dephasing did not suppress coherences");
    }
  }
  out.rho = state;
  return out;
}

DensityMatrix make_inverted_reference(double p0, double p1, int dim) {
  if (p0 < 0.0 || p1 < 0.0 || std::abs(p0 + p1 - 1.0) > 1e-12)
    throw std::invalid_argument("make_inverted_reference: invalid probabilities");
  const double pops[] = {p0, p1};
  return DensityMatrix::diagonal(pops, dim);
}

}  // namespace phasetomo
