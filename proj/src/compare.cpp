#include "phasetomo/compare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace phasetomo {

namespace {

constexpr double kPi = std::numbers::pi;

TableCheck deviation_check(std::string name, std::span<const double> got, std::span<const double> want,
                           double tolerance) {
  TableCheck c{std::move(name), got.size(), 0.0, tolerance, true};
  for (std::size_t i = 0; i < got.size(); ++i) c.max_abs_deviation = std::max(c.max_abs_deviation, std::abs(got[i] - want[i]));
  if (tolerance > 0.0) c.pass = c.max_abs_deviation < tolerance;
  return c;
}

// R rho R^dag with level phases exp(-i phi_n theta) from the lattice spectrum.
DensityMatrix realistic_rotation(const DensityMatrix& rho, const PreparedRun& prep, double theta) {
  const int dim = rho.dim();
  if (prep.basis.level_count() < dim) throw std::invalid_argument("compare: basis smaller than the state");
  CVector phases(dim);
  const double e0 = prep.basis.energies[0];
  for (int n = 0; n < dim; ++n)
    phases(n) = std::polar(1.0, -(prep.basis.energies[n] - e0) / (kHbar * prep.spec.omega()) * theta);
  return DensityMatrix(phases.asDiagonal() * rho.elements() * phases.conjugate().asDiagonal());
}

}  // namespace

std::string CompareReport::to_text() const {
  std::string out;
  for (const auto& c : checks)
    out += fmt::format("{:<40} points={:<6} max_abs_dev={:.3e} tol={} {}\n", c.name, c.points, c.max_abs_deviation,
                       c.tolerance > 0.0 ? fmt::format("{:.1e}", c.tolerance) : std::string("-"),
                       c.pass ? "ok" : "FAIL");
  if (noise) out += fmt::format("within 3 sigma: {:.4f} (need >= 0.99)\n", within_three_sigma);
  out += pass ? "compare: PASS\n" : "compare: FAIL\n";
  return out;
}

CompareReport compare(const RunConfig& config, std::span<const SampleRow> rows) {
  const PreparedRun prep = prepare_run(config);
  const ScanGrid grid = config.grid();
  if (rows.size() != grid.size())
    throw std::invalid_argument(fmt::format("compare: {} rows for a {}-point grid", rows.size(), grid.size()));

  CompareReport report;
  report.noise = config.noise.enabled;
  const std::size_t n = rows.size();

  {
    std::vector<double> total(n), one(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) total[i] = rows[i].p0 + rows[i].p1 + rows[i].p_lost;
    report.checks.push_back(deviation_check("records.p0+p1+p_lost vs 1", total, one, 1e-9));
  }

  const bool husimi = config.scan.mode == ScanMode::husimi;
  const bool realistic = config.scan.rotation == RotationModel::realistic;

  if (!report.noise) {
    std::vector<double> got(n), want(n);
    for (std::size_t i = 0; i < n; ++i) got[i] = rows[i].value;

    if (husimi) {
      if (config.scan.ensemble) {
        const DephasingModel model = config.dephasing_model(prep.spec.omega());
        const auto omega = model.frequencies();
        const auto weight = model.weights();
        for (std::size_t i = 0; i < n; ++i) {
          double q = 0.0;
          for (std::size_t k = 0; k < omega.size(); ++k) {
            const OscillatorSpec well(prep.spec.mass(), omega[k]);
            const double a = rows[i].x_m / (2.0 * well.x0());
            q += weight[k] * husimi_point(prep.rho, PhasePoint::polar(a, rows[i].theta * omega[k] / prep.spec.omega()));
          }
          want[i] = q;
        }
      } else {
        for (std::size_t i = 0; i < n; ++i)
          want[i] = realistic ? husimi_point(realistic_rotation(prep.rho, prep, rows[i].theta),
                                             PhasePoint::polar(rows[i].alpha_abs, 0.0))
                              : husimi_point(prep.rho, PhasePoint::polar(rows[i].alpha_abs, rows[i].theta));
      }
      report.checks.push_back(deviation_check("samples.value vs husimi_point", got, want, 1e-10));
    } else {
      for (std::size_t i = 0; i < n; ++i)
        want[i] = realistic ? wigner_point_parity(realistic_rotation(prep.rho, prep, rows[i].theta),
                                                  PhasePoint::polar(rows[i].alpha_abs, 0.0))
                            : wigner_point_parity(prep.rho, PhasePoint::polar(rows[i].alpha_abs, rows[i].theta));
      double max_alpha = 0.0;
      for (const auto& r : rows) max_alpha = std::max(max_alpha, r.alpha_abs);
      const bool full = config.scan.bound_dim >= working_dimension(prep.rho.dim(), max_alpha);
      report.checks.push_back(deviation_check("samples.value vs wigner_point_parity", got, want, full ? 1e-8 : 0.0));
      if (!full) {
        TableCheck c{"samples.bounds contain wigner_point_parity", n, 0.0, 1e-12, true};
        for (std::size_t i = 0; i < n; ++i)
          c.max_abs_deviation =
              std::max({c.max_abs_deviation, rows[i].lower - want[i], want[i] - rows[i].upper});
        c.pass = c.max_abs_deviation <= c.tolerance;
        report.checks.push_back(c);
      }
    }
  } else {
    RunConfig exact_config = config;
    exact_config.noise.enabled = false;
    const ResultBundle exact = run(exact_config);
    const double atoms = static_cast<double>(config.noise.atom_count) * config.noise.repetitions;

    std::size_t within = 0, trials = 0;
    std::vector<double> got0(n), want0(n), got1(n), want1(n);
    for (std::size_t i = 0; i < n; ++i) {
      got0[i] = rows[i].p0;
      want0[i] = exact.records[i].p0;
      got1[i] = rows[i].p1;
      want1[i] = exact.records[i].p1;
      for (const auto& [g, p] : {std::pair{got0[i], want0[i]}, std::pair{got1[i], want1[i]}}) {
        const double sigma = std::sqrt(std::max(0.0, p * (1.0 - p)) / atoms);
        ++trials;
        if (std::abs(g - p) <= 3.0 * sigma + 1.0 / atoms * 1e-9) ++within;
      }
    }
    report.checks.push_back(deviation_check("records.p0 vs exact", got0, want0, 0.0));
    report.checks.push_back(deviation_check("records.p1 vs exact", got1, want1, 0.0));
    report.within_three_sigma = trials ? static_cast<double>(within) / trials : 1.0;

    if (husimi || config.scan.bound_dim == 2) {
      std::vector<double> got(n), want(n);
      for (std::size_t i = 0; i < n; ++i) {
        got[i] = rows[i].value;
        want[i] = husimi ? rows[i].p0 / kPi : (rows[i].p0 - rows[i].p1) / kPi;
      }
      report.checks.push_back(deviation_check("samples.value vs sampled populations", got, want, 1e-12));
    }
    if (report.within_three_sigma < 0.99) report.pass = false;
  }

  for (const auto& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

CompareReport compare(const ResultBundle& bundle) {
  const auto rows = sample_rows(bundle);
  return compare(bundle.config, rows);
}

CompareReport compare_directory(const std::filesystem::path& directory) {
  const RunConfig config = load_config(directory / "config.yaml");
  const auto rows = read_samples_csv(directory / "samples.csv");
  return compare(config, rows);
}

}  // namespace phasetomo
