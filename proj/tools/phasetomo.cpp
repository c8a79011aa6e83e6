// Command-line front end: run, compare, sweep, show-defaults.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "phasetomo/compare.hpp"
#include "phasetomo/config.hpp"
#include "phasetomo/emit.hpp"
#include "phasetomo/errors.hpp"
#include "phasetomo/run.hpp"

namespace fs = std::filesystem;
using namespace phasetomo;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

struct RunArgs {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<int> threads;
};

RunConfig apply_flags(RunConfig c, const RunArgs& a) {
  if (!a.out.empty()) c.output_directory = a.out;
  if (a.seed) c.noise.seed = *a.seed;
  if (a.mode == "noise") c.noise.enabled = true;
  if (a.mode == "exact") c.noise.enabled = false;
  if (a.threads) {
    c.execution.threads = *a.threads;
    c.execution.parallel = *a.threads != 1;
  }
  c.validate();
  return c;
}

int command_run(const RunArgs& args) {
  std::vector<ResultBundle> bundles;
  std::optional<fs::path> root;
  for (const auto& path : args.configs) {
    const RunConfig config = apply_flags(load_config(path), args);
    ResultBundle bundle = run(config);
    const fs::path dir = fs::path(config.output_directory) / config.run_id;
    write_bundle(bundle, dir);
    fmt::print("{}: {} points -> {}\n", config.run_id, bundle.samples.size(), dir.string());
    for (const auto& w : bundle.warnings) fmt::print(stderr, "warning [{}]: {}\n", config.run_id, w);
    if (!root) root = fs::path(config.output_directory);
    bundles.push_back(std::move(bundle));
  }
  if (bundles.size() > 1) {
    const fs::path combined = *root / "cross_sections.csv";
    write_text(combined, cross_section_csv(bundles));
    fmt::print("cross sections -> {}\n", combined.string());
  }
  return kOk;
}

int command_compare(const std::vector<std::string>& dirs) {
  bool pass = true;
  for (const auto& d : dirs) {
    const CompareReport report = compare_directory(d);
    fmt::print("== {}\n{}", d, report.to_text());
    pass = pass && report.pass;
  }
  return pass ? kOk : kNumerical;
}

int command_sweep(const std::string& base, const std::string& key, const std::vector<std::string>& values,
                  const std::string& out) {
  const RunConfig config = load_config(base);
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());
  for (std::size_t i = 0; i < values.size(); ++i) {
    RunConfig variant = with_override(config, key, values[i]);
    variant.run_id = fmt::format("{}-{:03d}", config.run_id, i);
    const fs::path file = dir / (variant.run_id + ".yaml");
    write_text(file, emit_config(variant));
    fmt::print("{}\n", file.string());
  }
  return kOk;
}

int command_show_defaults(const std::string& which) {
  if (which == "husimi" || which == "both") fmt::print("{}", emit_config(RunConfig::husimi_default()));
  if (which == "both") fmt::print("---\n");
  if (which == "wigner" || which == "both") fmt::print("{}", emit_config(RunConfig::wigner_default()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-space tomography of lattice-trapped atoms"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment per config file");
  run_cmd->add_option("--config", run_args.configs, "Run config (repeatable)")->required();
  run_cmd->add_option("--out", run_args.out, "Output directory (overrides output.directory)");
  run_cmd->add_option("--seed", run_args.seed, "Noise seed (overrides noise.seed)");
  run_cmd->add_option("--mode", run_args.mode, "exact or noise")->check(CLI::IsMember({"exact", "noise"}));
  run_cmd->add_option("--threads", run_args.threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);

  std::vector<std::string> compare_dirs;
  auto* compare_cmd = app.add_subcommand("compare", "Check emitted bundles against direct evaluation");
  compare_cmd->add_option("bundle", compare_dirs, "Bundle directories")->required();

  std::string sweep_base, sweep_key, sweep_out = "sweep";
  std::vector<std::string> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Write one config per value of a key");
  sweep_cmd->add_option("--config", sweep_base, "Base config")->required();
  sweep_cmd->add_option("--key", sweep_key, "Dotted key, e.g. scan.displacement_step")->required();
  sweep_cmd->add_option("--values", sweep_values, "Values, e.g. \"20 nm\" \"25.8 nm\"")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "Directory for the generated configs");

  std::string which = "both";
  auto* defaults_cmd = app.add_subcommand("show-defaults", "Print the two reference configs");
  defaults_cmd->add_option("--which", which, "husimi, wigner or both")
      ->check(CLI::IsMember({"husimi", "wigner", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run_cmd) return command_run(run_args);
    if (*compare_cmd) return command_compare(compare_dirs);
    if (*sweep_cmd) return command_sweep(sweep_base, sweep_key, sweep_values, sweep_out);
    if (*defaults_cmd) return command_show_defaults(which);
  } catch (const ConfigError& e) {
    if (e.line() > 0)
      fmt::print(stderr, "config error (line {}, column {}): {}\n", e.line(), e.column(), e.what());
    else
      fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  } catch (const NumericalFailure& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return kConfig;
  }
  return kOk;
}
