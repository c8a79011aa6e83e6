#include "phasetomo/run.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "phasetomo/errors.hpp"
#include "phasetomo/state_prep.hpp"

namespace phasetomo {

std::string version() { return PHASETOMO_VERSION; }

void ResultBundle::warn(const std::string& message) {
  if (std::find(warnings.begin(), warnings.end(), message) == warnings.end()) warnings.push_back(message);
}

namespace {

// Runs `body`, prefixing the stage name to any failure while keeping its type.
template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const FitFailure& e) {
    throw FitFailure(fmt::format("{}: {}", name, e.what()), e.residual_norm());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(fmt::format("{}: {}", name, e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", name, e.what()));
  }
}

bool full_circle(const ScanGrid& grid) {
  if (grid.angles.size() < 3) return false;
  const double step = (grid.angles.back() - grid.angles.front()) / (grid.angles.size() - 1);
  return grid.angles.back() - grid.angles.front() + step >= 2.0 * std::numbers::pi - 1e-9;
}

}  // namespace

PreparedRun prepare_run(const RunConfig& config) {
  config.validate();
  const LatticeSpec lattice = stage("lattice", [&] { return config.lattice_spec(); });
  BoundStateBasis basis = stage("lattice", [&] { return solve_bound_states(lattice); });
  const OscillatorSpec spec = config.oscillator_spec(lattice);
  PreparedRun out{lattice, std::move(basis), spec, DensityMatrix(), 0.0, {}};

  const PreparationConfig prep = config.preparation_config(lattice);
  const int dim = config.oscillator.dim;
  stage("preparation", [&] {
    switch (prep.kind) {
      case PreparationKind::ground:
        out.rho = prepare_ground(prep, dim);
        break;
      case PreparationKind::coherent: {
        auto state = prepare_coherent(prep.shift.displacement(), spec, prep, out.basis.bound_count, dim);
        out.rho = state.rho;
        out.loss = state.loss;
        out.warnings = state.warnings;
        break;
      }
      case PreparationKind::inverted: {
        auto state = prepare_inverted(lattice, prep, config.dephasing_model(spec.omega()), dim, &out.basis);
        out.rho = state.rho;
        out.loss = state.loss;
        out.warnings = state.warnings;
        break;
      }
      case PreparationKind::explicit_populations:
        out.rho = DensityMatrix::diagonal(prep.populations, dim);
        break;
    }
    if (const auto width = config.preparation.ground_width) {
      auto state = rescale_ground_width(out.rho, *width / spec.x0(), dim);
      out.rho = state.rho;
      out.loss = state.loss;
    }
    return 0;
  });
  return out;
}

ResultBundle run(const RunConfig& config) {
  PreparedRun prepared = prepare_run(config);

  ResultBundle b;
  b.config = config;
  b.config_echo = emit_config(config);
  b.version = version();
  b.grid = config.grid();
  b.omega = prepared.spec.omega();
  b.x0 = prepared.spec.x0();
  b.bound_count = prepared.basis.bound_count;
  b.preparation_loss = prepared.loss;
  b.rho = prepared.rho;
  for (const auto& w : prepared.warnings) b.warn(w);

  const ScanOptions options = config.scan_options(&prepared.basis);
  if (config.scan.mode == ScanMode::husimi) {
    HusimiScan scan = stage("husimi scan", [&] {
      if (config.scan.ensemble)
        return run_ensemble_husimi_scan(b.rho, prepared.spec, config.dephasing_model(b.omega), b.grid, options);
      return run_husimi_scan(b.rho, prepared.spec, b.grid, options);
    });
    b.records = std::move(scan.records);
    b.samples = std::move(scan.samples);
    if (full_circle(b.grid) && b.grid.displacements.size() >= 2) {
      b.xrms = stage("x_rms inference", [&] { return infer_xrms_from_normalization(b.samples, b.grid); });
      if (b.xrms->extrapolated)
        b.warn(fmt::format("Husimi distribution not decayed at the largest displacement (edge/peak {:.3g}); "
                           "x_rms normalization includes an extrapolated Gaussian tail",
                           b.xrms->edge_ratio));
    } else {
      b.warn("scan does not cover a full circle; x_rms inference skipped");
    }
  } else {
    b.records = stage("wigner scan", [&] {
      return run_wigner_scan(b.rho, prepared.spec, b.grid, config.scan.bound_dim, options);
    });
    b.samples = estimate_wigner(b.records);
    if (full_circle(b.grid)) {
      b.normalization = normalization_report(b.samples, b.grid);
      if (!b.normalization->ordered) b.warn("normalization integrals are not ordered lower <= value <= upper");
    } else {
      b.warn("scan does not cover a full circle; normalization report skipped");
    }
  }

  b.peak = max_sample(b.samples);
  const double angle = config.scan.mode == ScanMode::husimi ? b.peak->theta : 0.0;
  const std::string label = config.scan.mode == ScanMode::husimi ? "peak" : "theta0";
  CrossSection cut = cross_section(b.samples, b.grid, angle);
  if (config.scan.mode == ScanMode::husimi && cut.position.size() >= 6) {
    try {
      const GaussianFit fit = fit_gaussian_cross_section(cut.position, cut.value);
      b.fits.push_back({label, cut.angle, fit, fit.center * std::cos(cut.angle), fit.center * std::sin(cut.angle)});
    } catch (const FitFailure& e) {
      b.warn(fmt::format("cross-section fit failed: {} (residual {:.3g})", e.what(), e.residual_norm()));
    }
  }
  b.cuts.push_back({label, std::move(cut)});
  return b;
}

}  // namespace phasetomo
