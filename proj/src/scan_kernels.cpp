#include "phasetomo/scan_kernels.hpp"

#include <algorithm>
#include <stdexcept>

#include <omp.h>

namespace phasetomo::kernels {

ScanContext make_context(const DensityMatrix& rho, const OscillatorSpec& spec, const ScanGrid& grid,
                         int resolved_levels, const ScanOptions& options) {
  if (resolved_levels < 1) throw std::invalid_argument("scan: resolved_levels must be >= 1");
  const int dim = rho.dim();
  ScanContext ctx;
  ctx.rho = rho.elements();
  ctx.resolved_levels = resolved_levels;

  ctx.level_phase_rate.resize(dim);
  if (options.rotation == RotationModel::realistic) {
    if (options.basis == nullptr) throw std::invalid_argument("scan: realistic rotation needs a bound-state basis");
    if (options.basis->level_count() < dim)
      throw std::invalid_argument("scan: basis has fewer levels than the density matrix");
    const double e0 = options.basis->energies[0];
    for (int n = 0; n < dim; ++n)
      ctx.level_phase_rate[n] = (options.basis->energies[n] - e0) / (kHbar * spec.omega());
  } else {
    for (int n = 0; n < dim; ++n) ctx.level_phase_rate[n] = n;
  }

  const double scale = 1.0 / (2.0 * spec.x0());
  ctx.alpha.reserve(grid.displacements.size());
  ctx.displacement_rows.reserve(grid.displacements.size());
  for (double x : grid.displacements) {
    const double a = x * scale;
    ctx.alpha.push_back(a);
    if (a == 0.0) {
      ctx.displacement_rows.push_back(CMatrix::Identity(dim, dim));
    } else {
      const int work = working_dimension(dim, a);
      ctx.displacement_rows.push_back(displacement_matrix(Complex(a, 0.0), work).topRows(dim));
    }
  }
  return ctx;
}

void compute_point(const ScanContext& ctx, const ScanGrid& grid, std::size_t k, PopulationRecord& record) {
  const std::size_t nd = grid.displacements.size();
  const std::size_t ai = k / nd;
  const std::size_t di = k % nd;
  const double theta = grid.angles[ai];
  const auto dim = ctx.rho.rows();

  record.index = k;
  record.theta = theta;
  record.displacement = grid.displacements[di];
  record.alpha_abs = ctx.alpha[di];

  // R(theta) rho R^dag(theta), R = diag(exp(-i phi_n theta)).
  CVector phases(dim);
  for (Eigen::Index n = 0; n < dim; ++n)
    phases(n) = std::polar(1.0, -ctx.level_phase_rate[n] * ctx.angle_scale * theta);
  const CMatrix rotated = phases.asDiagonal() * ctx.rho * phases.conjugate().asDiagonal();

  // p_n = <n| D^dag rho_rot D |n> with D restricted to the rows where rho lives.
  const CMatrix& d = ctx.displacement_rows[di];
  const CMatrix m = rotated * d;
  const auto work = d.cols();
  const int resolved = static_cast<int>(std::min<Eigen::Index>(ctx.resolved_levels, work));

  double p0 = 0.0, p1 = 0.0, lost = 0.0;
  record.higher_levels.assign(resolved > 2 ? resolved - 2 : 0, 0.0);
  for (Eigen::Index n = 0; n < work; ++n) {
    const double p = std::max(0.0, d.col(n).dot(m.col(n)).real());
    if (n == 0)
      p0 = p;
    else if (n == 1)
      p1 = p;
    else {
      lost += p;
      if (n < resolved) record.higher_levels[n - 2] = p;
    }
  }
  record.p0 = p0;
  record.p1 = p1;
  record.p_lost = lost;
  record.shot_sampled = false;
  record.atom_count = 0;
}

void scan_serial(const ScanContext& ctx, const ScanGrid& grid, std::span<PopulationRecord> records) {
  for (std::size_t k = 0; k < records.size(); ++k) compute_point(ctx, grid, k, records[k]);
}

void scan_omp(const ScanContext& ctx, const ScanGrid& grid, std::span<PopulationRecord> records, int threads) {
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (std::ptrdiff_t k = 0; k < n; ++k) compute_point(ctx, grid, static_cast<std::size_t>(k), records[k]);
}

void shot_noise_serial(std::span<PopulationRecord> records, const NoiseOptions& noise) {
  const long atoms = noise.atom_count * std::max(1, noise.repetitions);
  for (auto& r : records) r = sample_shot_noise(r, atoms, noise.seed);
}

void shot_noise_omp(std::span<PopulationRecord> records, const NoiseOptions& noise, int threads) {
  const long atoms = noise.atom_count * std::max(1, noise.repetitions);
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (std::ptrdiff_t k = 0; k < n; ++k) records[k] = sample_shot_noise(records[k], atoms, noise.seed);
}

namespace {

WignerGrid empty_grid(std::span<const double> x, std::span<const double> p) {
  WignerGrid out;
  out.x.assign(x.begin(), x.end());
  out.p.assign(p.begin(), p.end());
  out.values.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p.size()));
  return out;
}

}  // namespace

WignerGrid wigner_grid_serial(const DensityMatrix& rho, const OscillatorSpec& spec, std::span<const double> x,
                              std::span<const double> p) {
  WignerGrid out = empty_grid(x, p);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      out.values(i, j) = wigner_point_parity(rho, PhasePoint::physical(x[i], p[j], spec));
  return out;
}

WignerGrid wigner_grid_omp(const DensityMatrix& rho, const OscillatorSpec& spec, std::span<const double> x,
                           std::span<const double> p, int threads) {
  WignerGrid out = empty_grid(x, p);
  const auto total = static_cast<std::ptrdiff_t>(x.size() * p.size());
  const std::size_t np = p.size();
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(team)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) / np;
    const std::size_t j = static_cast<std::size_t>(k) % np;
    out.values(i, j) = wigner_point_parity(rho, PhasePoint::physical(x[i], p[j], spec));
  }
  return out;
}

}  // namespace phasetomo::kernels
