#include "phasetomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "phasetomo/quadrature.hpp"
#include "phasetomo/scan_kernels.hpp"

namespace phasetomo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleSlack = 1e-12;

void check_samples(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid) {
  grid.validate();
  if (samples.size() != grid.size()) throw std::invalid_argument("sample count does not match the scan grid");
}

// Angle-weighted ring sums of `field(sample)` at every displacement.
template <class Field>
std::vector<double> ring_sums(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid, Field field) {
  const auto w = periodic_angle_weights(grid.angles);
  std::vector<double> ring(grid.displacements.size(), 0.0);
  for (std::size_t a = 0; a < grid.angles.size(); ++a)
    for (std::size_t d = 0; d < ring.size(); ++d) ring[d] += w[a] * field(samples[grid.index(a, d)]);
  return ring;
}

void apply_noise(std::vector<PopulationRecord>& records, const ScanOptions& options) {
  if (!options.noise) return;
  if (options.noise->atom_count < 1) throw std::invalid_argument("noise: atom_count must be >= 1");
  if (options.noise->repetitions < 1) throw std::invalid_argument("noise: repetitions must be >= 1");
  if (options.execution == Execution::parallel)
    kernels::shot_noise_omp(records, *options.noise, options.threads);
  else
    kernels::shot_noise_serial(records, *options.noise);
}

std::vector<PopulationRecord> scan(const DensityMatrix& rho, const OscillatorSpec& spec, const ScanGrid& grid,
                                   int resolved, const ScanOptions& options) {
  const kernels::ScanContext ctx = kernels::make_context(rho, spec, grid, resolved, options);
  std::vector<PopulationRecord> records(grid.size());
  if (options.execution == Execution::parallel)
    kernels::scan_omp(ctx, grid, records, options.threads);
  else
    kernels::scan_serial(ctx, grid, records);
  return records;
}

}  // namespace

// ----------------------------------------------------------------------------
// Grid

ScanGrid ScanGrid::uniform(ScanMode mode, int angle_count, double angle_span, int displacement_count,
                           double displacement_step) {
  if (angle_count < 1 || displacement_count < 1) throw std::invalid_argument("ScanGrid: counts must be >= 1");
  if (!(angle_span >= 0.0) || !(displacement_step > 0.0))
    throw std::invalid_argument("ScanGrid: spans must be positive");
  ScanGrid g;
  g.mode = mode;
  g.angles.resize(angle_count);
  for (int i = 0; i < angle_count; ++i)
    g.angles[i] = angle_count == 1 ? 0.0 : angle_span * i / (angle_count - 1);
  g.displacements.resize(displacement_count);
  for (int i = 0; i < displacement_count; ++i) g.displacements[i] = displacement_step * i;
  g.validate();
  return g;
}

ScanGrid ScanGrid::husimi_default() { return uniform(ScanMode::husimi, 27, kTwoPi, 19, 25.8e-9); }

ScanGrid ScanGrid::wigner_default() { return uniform(ScanMode::wigner, 41, kTwoPi, 19, 25.8e-9); }

void ScanGrid::validate() const {
  if (angles.empty() || displacements.empty()) throw std::invalid_argument("ScanGrid: empty axis");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!(angles[i] >= 0.0) || angles[i] > kTwoPi + kAngleSlack)
      throw std::invalid_argument("ScanGrid: angles must lie in [0, 2 pi]");
    if (i > 0 && !(angles[i] > angles[i - 1])) throw std::invalid_argument("ScanGrid: angles must increase");
  }
  for (std::size_t i = 0; i < displacements.size(); ++i) {
    if (!(displacements[i] >= 0.0)) throw std::invalid_argument("ScanGrid: displacements must be non-negative");
    if (i > 0 && !(displacements[i] > displacements[i - 1]))
      throw std::invalid_argument("ScanGrid: displacements must increase");
  }
}

// ----------------------------------------------------------------------------
// Records

double PopulationRecord::unresolved() const {
  double resolved = 0.0;
  for (double p : higher_levels) resolved += p;
  return std::max(0.0, p_lost - resolved);
}

QuasiDistributionSample husimi_sample(const PopulationRecord& record) {
  const double q = record.p0 / kPi;
  return {record.index, record.alpha_abs, record.theta, record.displacement, q, q, q};
}

QuasiDistributionSample estimate_wigner(const PopulationRecord& record) {
  double parity = record.p0 - record.p1;
  for (std::size_t j = 0; j < record.higher_levels.size(); ++j)
    parity += (j % 2 == 0 ? 1.0 : -1.0) * record.higher_levels[j];
  const double u = record.unresolved();
  QuasiDistributionSample s{record.index, record.alpha_abs, record.theta, record.displacement, parity / kPi,
                            (parity + u) / kPi, (parity - u) / kPi};
  return s;
}

std::vector<QuasiDistributionSample> estimate_wigner(std::span<const PopulationRecord> records) {
  std::vector<QuasiDistributionSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(estimate_wigner(r));
  return out;
}

PopulationRecord sample_shot_noise(const PopulationRecord& record, long atom_count, std::uint64_t seed) {
  if (atom_count < 1) throw std::invalid_argument("sample_shot_noise: atom_count must be >= 1");

  std::vector<double> probs;
  probs.reserve(record.higher_levels.size() + 3);
  probs.push_back(record.p0);
  probs.push_back(record.p1);
  for (double p : record.higher_levels) probs.push_back(p);
  probs.push_back(record.unresolved());
  double total = 0.0;
  for (double& p : probs) total += (p = std::max(0.0, p));
  if (!(total > 0.0)) throw std::invalid_argument("sample_shot_noise: record has no population");

  const auto index = static_cast<std::uint64_t>(record.index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);

  // Sequential conditional binomials.
  std::vector<long> counts(probs.size(), 0);
  long remaining = atom_count;
  double remaining_p = total;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double q = remaining_p > 0.0 ? probs[i] / remaining_p : 0.0;
    if (q >= 1.0) {
      counts[i] = remaining;
    } else if (q > 0.0) {
      std::binomial_distribution<long> draw(remaining, q);
      counts[i] = draw(rng);
    }
    remaining -= counts[i];
    remaining_p -= probs[i];
  }
  counts.back() += remaining;

  const double n = static_cast<double>(atom_count);
  PopulationRecord out = record;
  out.p0 = counts[0] / n;
  out.p1 = counts[1] / n;
  out.p_lost = static_cast<double>(atom_count - counts[0] - counts[1]) / n;
  for (std::size_t j = 0; j < out.higher_levels.size(); ++j) out.higher_levels[j] = counts[j + 2] / n;
  out.shot_sampled = true;
  out.atom_count = atom_count;
  return out;
}

// ----------------------------------------------------------------------------
// Scans

HusimiScan run_husimi_scan(const DensityMatrix& rho, const OscillatorSpec& spec, const ScanGrid& grid,
                           const ScanOptions& options) {
  grid.validate();
  if (grid.mode != ScanMode::husimi) throw std::invalid_argument("run_husimi_scan: grid mode must be husimi");
  HusimiScan out;
  out.records = scan(rho, spec, grid, 2, options);
  apply_noise(out.records, options);
  out.samples.reserve(out.records.size());
  for (const auto& r : out.records) out.samples.push_back(husimi_sample(r));
  return out;
}

HusimiScan run_ensemble_husimi_scan(const DensityMatrix& rho, const OscillatorSpec& mean_spec,
                                    const DephasingModel& dephasing, const ScanGrid& grid,
                                    const ScanOptions& options) {
  grid.validate();
  dephasing.validate();
  if (grid.mode != ScanMode::husimi)
    throw std::invalid_argument("run_ensemble_husimi_scan: grid mode must be husimi");
  if (options.rotation != RotationModel::harmonic)
    throw std::invalid_argument("run_ensemble_husimi_scan: only harmonic rotation is supported");
  if (std::abs(dephasing.mean_omega - mean_spec.omega()) > 1e-9 * mean_spec.omega())
    throw std::invalid_argument("run_ensemble_husimi_scan: dephasing mean differs from the oscillator frequency");

  const auto omega = dephasing.frequencies();
  const auto weight = dephasing.weights();
  HusimiScan out;
  out.records.resize(grid.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const OscillatorSpec well(mean_spec.mass(), omega[k]);
    kernels::ScanContext ctx = kernels::make_context(rho, well, grid, 2, options);
    ctx.angle_scale = omega[k] / mean_spec.omega();
    std::vector<PopulationRecord> part(grid.size());
    if (options.execution == Execution::parallel)
      kernels::scan_omp(ctx, grid, part, options.threads);
    else
      kernels::scan_serial(ctx, grid, part);
    for (std::size_t i = 0; i < part.size(); ++i) {
      auto& r = out.records[i];
      if (k == 0) {
        r = part[i];
        r.alpha_abs = grid.displacements[i % grid.displacements.size()] / (2.0 * mean_spec.x0());
        r.p0 = r.p1 = r.p_lost = 0.0;
      }
      r.p0 += weight[k] * part[i].p0;
      r.p1 += weight[k] * part[i].p1;
      r.p_lost += weight[k] * part[i].p_lost;
    }
  }
  apply_noise(out.records, options);
  out.samples.reserve(out.records.size());
  for (const auto& r : out.records) out.samples.push_back(husimi_sample(r));
  return out;
}

std::vector<PopulationRecord> run_wigner_scan(const DensityMatrix& rho, const OscillatorSpec& spec,
                                              const ScanGrid& grid, int bound_dim, const ScanOptions& options) {
  grid.validate();
  if (grid.mode != ScanMode::wigner) throw std::invalid_argument("run_wigner_scan: grid mode must be wigner");
  if (bound_dim < 2) throw std::invalid_argument("run_wigner_scan: bound_dim must be >= 2");
  auto records = scan(rho, spec, grid, bound_dim, options);
  apply_noise(records, options);
  return records;
}

// ----------------------------------------------------------------------------
// Estimators

XrmsEstimate infer_xrms_from_normalization(std::span<const QuasiDistributionSample> samples,
                                           const ScanGrid& grid) {
  check_samples(samples, grid);
  const auto ring = ring_sums(samples, grid, [](const QuasiDistributionSample& s) { return s.value; });
  const auto& r = grid.displacements;
  const std::size_t n = r.size();
  if (n < 2) throw std::invalid_argument("infer_xrms_from_normalization: need at least two displacements");

  std::vector<double> integrand(n);
  for (std::size_t d = 0; d < n; ++d) integrand[d] = ring[d] * r[d];
  double integral = trapezoid(r, integrand);

  XrmsEstimate out;
  const double peak = *std::max_element(ring.begin(), ring.end());
  if (!(peak > 0.0)) throw NumericalFailure("infer_xrms_from_normalization: distribution vanishes");
  out.edge_ratio = ring[n - 1] / peak;
  if (out.edge_ratio > 1e-3) {
    out.extrapolated = true;
    // Gaussian tail ring(r) = ring_n exp(-(r^2 - R^2)/c) matched to the last two rings.
    if (ring[n - 2] > ring[n - 1] && ring[n - 1] > 0.0) {
      const double c = (r[n - 1] * r[n - 1] - r[n - 2] * r[n - 2]) / std::log(ring[n - 2] / ring[n - 1]);
      integral += ring[n - 1] * 0.5 * c;
    }
  }
  if (!(integral > 0.0)) throw NumericalFailure("infer_xrms_from_normalization: non-positive integral");
  out.x_rms = std::sqrt(integral / 4.0);
  return out;
}

GaussianFit fit_gaussian_cross_section(std::span<const double> positions, std::span<const double> values) {
  if (positions.size() != values.size()) throw std::invalid_argument("fit: size mismatch");
  const std::size_t n = positions.size();
  if (n < 6) throw std::invalid_argument("fit: need at least 6 points");

  // Moments of the positive part.
  double s0 = 0.0, s1 = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(positions[i]) || !std::isfinite(values[i])) throw std::invalid_argument("fit: non-finite data");
    const double v = std::max(0.0, values[i]);
    s0 += v;
    s1 += v * positions[i];
    peak = std::max(peak, values[i]);
  }
  if (!(s0 > 0.0) || !(peak > 0.0)) throw std::invalid_argument("fit: no positive signal");
  const double mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) s2 += std::max(0.0, values[i]) * (positions[i] - mean) * (positions[i] - mean);
  const double spread = std::sqrt(s2 / s0);
  const double span = *std::max_element(positions.begin(), positions.end()) -
                      *std::min_element(positions.begin(), positions.end());
  const double scale = spread > 0.0 ? spread : span;
  if (!(scale > 0.0)) throw std::invalid_argument("fit: positions do not span an interval");

  // Work in units of the initial width and peak.
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (positions[i] - mean) / scale;
    y[i] = values[i] / peak;
  }

  auto residuals = [&](const Eigen::Vector3d& q, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
    res.resize(n);
    if (jac) jac->resize(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (x[i] - q(1)) / q(2);
      const double g = std::exp(-0.5 * u * u);
      res(i) = q(0) * g - y[i];
      if (jac) {
        (*jac)(i, 0) = g;
        (*jac)(i, 1) = q(0) * g * u / q(2);
        (*jac)(i, 2) = q(0) * g * u * u / q(2);
      }
    }
  };

  Eigen::Vector3d q(1.0, 0.0, 1.0);
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  residuals(q, res, &jac);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  constexpr int kMaxIterations = 500;
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations && !converged; ++it) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * res;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Eigen::Matrix3d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = a.ldlt().solve(-grad);
      Eigen::Vector3d trial = q + step;
      trial(2) = std::abs(trial(2));
      Eigen::VectorXd trial_res;
      residuals(trial, trial_res, nullptr);
      const double trial_cost = trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel = step.norm() / (q.norm() + 1e-300);
        const double drop = cost - trial_cost;
        q = trial;
        cost = trial_cost;
        residuals(q, res, &jac);
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (rel < 1e-13 || drop <= 1e-15 * (cost + 1e-300)) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) converged = true;  // no descent direction left: stationary
  }

  GaussianFit fit;
  fit.amplitude = q(0) * peak;
  fit.center = mean + q(1) * scale;
  fit.width = std::abs(q(2)) * scale;
  fit.residual_norm = std::sqrt(cost) * peak;
  fit.iterations = it;
  if (!converged || !(fit.width > 0.0) || !std::isfinite(fit.amplitude))
    throw FitFailure("fit: Levenberg-Marquardt did not converge", fit.residual_norm);
  return fit;
}

NormalizationReport normalization_report(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid) {
  check_samples(samples, grid);
  std::vector<double> alpha(grid.displacements.size());
  for (std::size_t d = 0; d < alpha.size(); ++d) alpha[d] = samples[grid.index(0, d)].alpha_abs;

  auto integrate = [&](auto field) {
    const auto ring = ring_sums(samples, grid, field);
    std::vector<double> f(ring.size());
    for (std::size_t d = 0; d < f.size(); ++d) f[d] = ring[d] * alpha[d];
    return 2.0 * trapezoid(alpha, f);
  };
  NormalizationReport out;
  out.value = integrate([](const QuasiDistributionSample& s) { return s.value; });
  out.upper = integrate([](const QuasiDistributionSample& s) { return s.upper; });
  out.lower = integrate([](const QuasiDistributionSample& s) { return s.lower; });
  out.ordered = out.lower <= out.value && out.value <= out.upper;
  return out;
}

namespace {

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

std::size_t nearest_angle(const ScanGrid& grid, double angle) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.angles.size(); ++i)
    if (circular_distance(grid.angles[i], angle) < circular_distance(grid.angles[best], angle) - 1e-12) best = i;
  return best;
}

}  // namespace

CrossSection cross_section(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid, double angle) {
  check_samples(samples, grid);
  const std::size_t main = nearest_angle(grid, angle);
  const std::size_t opposite = nearest_angle(grid, grid.angles[main] + kPi);
  const auto& r = grid.displacements;
  CrossSection out;
  out.angle = grid.angles[main];
  auto push = [&](double position, const QuasiDistributionSample& s) {
    out.position.push_back(position);
    out.value.push_back(s.value);
    out.upper.push_back(s.upper);
    out.lower.push_back(s.lower);
  };
  const std::size_t skip = r.front() == 0.0 ? 1 : 0;
  for (std::size_t d = r.size(); d-- > skip;) push(-r[d], samples[grid.index(opposite, d)]);
  for (std::size_t d = 0; d < r.size(); ++d) push(r[d], samples[grid.index(main, d)]);
  return out;
}

const QuasiDistributionSample& max_sample(std::span<const QuasiDistributionSample> samples) {
  if (samples.empty()) throw std::invalid_argument("max_sample: no samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].value > samples[best].value) best = i;
  return samples[best];
}

CartesianResample resample_cartesian(std::span<const QuasiDistributionSample> samples, const ScanGrid& grid,
                                     std::span<const double> re_alpha, std::span<const double> im_alpha) {
  check_samples(samples, grid);
  const std::size_t na = grid.angles.size();
  const std::size_t nd = grid.displacements.size();
  std::vector<double> radius(nd);
  for (std::size_t d = 0; d < nd; ++d) radius[d] = samples[grid.index(0, d)].alpha_abs;
  auto f = [&](std::size_t a, std::size_t d) { return samples[grid.index(a, d)].value; };

  // Periodic angle axis: append the first ray at +2 pi unless already closed.
  std::vector<double> theta(grid.angles.begin(), grid.angles.end());
  std::vector<std::size_t> ray(na);
  for (std::size_t a = 0; a < na; ++a) ray[a] = a;
  const bool closed = std::abs(theta.back() - theta.front() - kTwoPi) < 1e-9;
  if (!closed) {
    theta.push_back(theta.front() + kTwoPi);
    ray.push_back(0);
  }

  CartesianResample out;
  out.re_alpha.assign(re_alpha.begin(), re_alpha.end());
  out.im_alpha.assign(im_alpha.begin(), im_alpha.end());
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(re_alpha.size()),
                                     static_cast<Eigen::Index>(im_alpha.size()));
  for (std::size_t i = 0; i < re_alpha.size(); ++i) {
    for (std::size_t j = 0; j < im_alpha.size(); ++j) {
      const double rr = std::hypot(re_alpha[i], im_alpha[j]);
      if (rr > radius.back() || rr < radius.front()) {
        ++out.outside;
        continue;
      }
      double t = std::atan2(im_alpha[j], re_alpha[i]);
      if (t < theta.front()) t += kTwoPi;
      if (t > theta.back()) t -= kTwoPi;
      if (t < theta.front()) {  // inside an angular gap the grid leaves open
        ++out.outside;
        continue;
      }
      const std::size_t d1 = std::min<std::size_t>(
          std::upper_bound(radius.begin(), radius.end(), rr) - radius.begin(), nd - 1);
      const std::size_t d0 = d1 == 0 ? 0 : d1 - 1;
      const std::size_t t1 = std::min<std::size_t>(
          std::upper_bound(theta.begin(), theta.end(), t) - theta.begin(), theta.size() - 1);
      const std::size_t t0 = t1 == 0 ? 0 : t1 - 1;
      const double u = d1 == d0 ? 0.0 : (rr - radius[d0]) / (radius[d1] - radius[d0]);
      const double v = t1 == t0 ? 0.0 : (t - theta[t0]) / (theta[t1] - theta[t0]);
      out.values(i, j) = (1 - u) * (1 - v) * f(ray[t0], d0) + u * (1 - v) * f(ray[t0], d1) +
                         (1 - u) * v * f(ray[t1], d0) + u * v * f(ray[t1], d1);
    }
  }

  double curvature = 0.0;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t d = 1; d + 1 < nd; ++d)
      curvature = std::max(curvature, std::abs(f(a, d + 1) - 2.0 * f(a, d) + f(a, d - 1)));
  double angular = 0.0;
  for (std::size_t a = 0; a + 2 < ray.size(); ++a)
    for (std::size_t d = 0; d < nd; ++d)
      angular = std::max(angular, std::abs(f(ray[a + 2], d) - 2.0 * f(ray[a + 1], d) + f(ray[a], d)));
  out.interpolation_error = (curvature + angular) / 8.0;
  return out;
}

}  // namespace phasetomo
