#include "phasetomo/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "phasetomo/errors.hpp"

namespace phasetomo {

namespace {

using units::Dimension;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ----------------------------------------------------------------------------
// Enum spellings

template <class E>
struct Spelling {
  E value;
  const char* name;
};

constexpr Spelling<PreparationKind> kKinds[] = {{PreparationKind::ground, "ground"},
                                                {PreparationKind::coherent, "coherent"},
                                                {PreparationKind::inverted, "inverted"},
                                                {PreparationKind::explicit_populations, "explicit"}};
constexpr Spelling<PipelineModel> kModels[] = {{PipelineModel::lattice, "lattice"},
                                               {PipelineModel::harmonic, "harmonic"}};
constexpr Spelling<ScanMode> kModes[] = {{ScanMode::husimi, "husimi"}, {ScanMode::wigner, "wigner"}};
constexpr Spelling<RotationModel> kRotations[] = {{RotationModel::harmonic, "harmonic"},
                                                  {RotationModel::realistic, "realistic"}};

template <class E, std::size_t N>
const char* spell(const Spelling<E> (&table)[N], E value) {
  for (const auto& s : table)
    if (s.value == value) return s.name;
  return "?";
}

// ----------------------------------------------------------------------------
// Section reader: typed access with key tracking and node positions.

using Marks = std::map<std::string, YAML::Mark>;

[[noreturn]] void fail_at(const std::string& key, const YAML::Mark& mark, const std::string& message) {
  const bool known = !mark.is_null();
  throw ConfigError(fmt::format("{}: {}", key, message), key, known ? mark.line + 1 : 0,
                    known ? mark.column + 1 : 0);
}

class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> allowed, Marks& marks)
      : node_(node), path_(std::move(path)), marks_(marks) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) fail_at(path_, node_.Mark(), "expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail_at(full(key), kv.first.Mark(), "unknown key");
      marks_[full(key)] = kv.second.Mark();
    }
  }

  YAML::Node child(const std::string& key) const {
    if (!node_ || node_.IsNull()) return YAML::Node();
    return node_[key];
  }

  bool has(const std::string& key) const {
    const auto n = child(key);
    return n && !n.IsNull();
  }

  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  std::string text(const std::string& key, std::string fallback) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    if (!n.IsScalar()) fail_at(full(key), n.Mark(), "expected a scalar");
    return n.as<std::string>();
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail_at(full(key), n.Mark(), "expected a number");
    }
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    try {
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      fail_at(full(key), n.Mark(), "expected an integer");
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail_at(full(key), n.Mark(), "expected true or false");
    }
  }

  units::Quantity quantity(const std::string& key, units::Quantity fallback, Dimension dim) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    try {
      return units::parse(n.as<std::string>(), dim);
    } catch (const std::invalid_argument& e) {
      fail_at(full(key), n.Mark(), e.what());
    } catch (const YAML::Exception&) {
      fail_at(full(key), n.Mark(), "expected a quantity string such as \"780 nm\"");
    }
  }

  double si(const std::string& key, double fallback, Dimension dim) const {
    const auto q = quantity(key, {fallback, false}, dim);
    return q.value;
  }

  template <class E, std::size_t N>
  E choice(const std::string& key, E fallback, const Spelling<E> (&table)[N]) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    const auto s = text(key, "");
    std::string names;
    for (const auto& entry : table) {
      if (s == entry.name) return entry.value;
      names += names.empty() ? "" : ", ";
      names += entry.name;
    }
    fail_at(full(key), n.Mark(), fmt::format("expected one of {}", names));
  }

  std::vector<double> numbers(const std::string& key) const {
    if (!has(key)) return {};
    const auto n = child(key);
    if (!n.IsSequence()) fail_at(full(key), n.Mark(), "expected a list of numbers");
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        fail_at(full(key), item.Mark(), "expected a number");
      }
    }
    return out;
  }

 private:
  YAML::Node node_;
  std::string path_;
  Marks& marks_;
};

[[noreturn]] void invalid(const std::string& key, const std::string& constraint) {
  throw ConfigError(fmt::format("{}: {}", key, constraint), key);
}

std::string number_text(double v) { return fmt::format("{:.17g}", v); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

// ----------------------------------------------------------------------------
// Presets

RunConfig RunConfig::husimi_default() {
  RunConfig c;
  c.run_id = "husimi-coherent";
  c.lattice.depth = {37.0, true};
  c.oscillator.omega = 48.33e3;
  c.preparation.kind = PreparationKind::coherent;
  c.preparation.shift = 60.0 * std::numbers::pi / 180.0;
  c.preparation.shift_is_phase = true;
  c.preparation.hold_time = 20e-6;
  c.scan.mode = ScanMode::husimi;
  c.scan.angle_count = 27;
  c.output_directory = "out";
  return c;
}

RunConfig RunConfig::wigner_default() {
  RunConfig c;
  c.run_id = "wigner-inverted";
  c.lattice.depth = {17.5, true};
  c.oscillator.omega = 32.2e3;
  c.preparation.kind = PreparationKind::explicit_populations;
  c.preparation.populations = {0.3, 0.7};
  c.scan.mode = ScanMode::wigner;
  c.scan.angle_count = 41;
  c.scan.bound_dim = 2;
  c.output_directory = "out";
  return c;
}

// ----------------------------------------------------------------------------
// Validation and derived objects

void RunConfig::validate() const {
  if (run_id.empty()) invalid("run_id", "must not be empty");
  for (char ch : run_id)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'))
      invalid("run_id", "may only contain letters, digits, '-', '_' and '.'");

  if (!(lattice.wavelength > 0.0)) invalid("lattice.wavelength", "must be positive");
  if (!(lattice.intersection_angle > 0.0) || lattice.intersection_angle > std::numbers::pi)
    invalid("lattice.intersection_angle", "must lie in (0, 180 deg]");
  if (!(lattice.depth.value > 0.0)) invalid("lattice.depth", "must be positive");
  if (!(lattice.mass > 0.0)) invalid("lattice.mass", "must be positive");

  if (oscillator.omega && !(*oscillator.omega > 0.0)) invalid("oscillator.omega", "must be positive");
  if (oscillator.dim < 2 || oscillator.dim > 32) invalid("oscillator.dim", "must lie in [2, 32]");

  const auto& p = preparation;
  if (!(p.contamination >= 0.0 && p.contamination <= 0.2))
    invalid("preparation.contamination", "must lie in [0, 0.2]");
  if (!(p.hold_time >= 0.0)) invalid("preparation.hold_time", "must be non-negative");
  if (!std::isfinite(p.shift)) invalid("preparation.shift", "must be finite");
  if (p.kind == PreparationKind::explicit_populations) {
    if (p.populations.empty()) invalid("preparation.populations", "required for explicit preparation");
    if (p.populations.size() > static_cast<std::size_t>(oscillator.dim))
      invalid("preparation.populations", "longer than oscillator.dim");
    double sum = 0.0;
    for (double x : p.populations) {
      if (!(x >= 0.0)) invalid("preparation.populations", "entries must be non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) invalid("preparation.populations", "must sum to 1");
  } else if (!p.populations.empty()) {
    invalid("preparation.populations", "only allowed with kind: explicit");
  }
  if (p.ground_width) {
    if (!(*p.ground_width > 0.0) || !std::isfinite(*p.ground_width))
      invalid("preparation.ground_width", "must be positive");
    if (p.kind != PreparationKind::ground && p.kind != PreparationKind::explicit_populations)
      invalid("preparation.ground_width", "only allowed with kind: ground or explicit");
  }
  if (p.kind == PreparationKind::inverted) {
    const double a = lattice_spec().period();
    const double d = p.shift_is_phase ? a * p.shift / kTwoPi : p.shift;
    if (!(std::abs(d) < a)) invalid("preparation.shift", "must move the lattice by less than one period");
  }

  if (scan.angle_count < 1) invalid("scan.angle_count", "must be >= 1");
  if (!(scan.angle_span >= 0.0) || scan.angle_span > kTwoPi * (1.0 + 1e-12))
    invalid("scan.angle_span", "must lie in [0, 360 deg]");
  if (scan.angle_count > 1 && !(scan.angle_span > 0.0)) invalid("scan.angle_span", "must be positive");
  if (scan.displacement_count < 1) invalid("scan.displacement_count", "must be >= 1");
  if (!(scan.displacement_step > 0.0)) invalid("scan.displacement_step", "must be positive");
  if (scan.bound_dim < 2) invalid("scan.bound_dim", "must be >= 2");
  if (scan.ensemble && scan.mode != ScanMode::husimi) invalid("scan.ensemble", "only supported for husimi scans");
  if (scan.ensemble && scan.rotation != RotationModel::harmonic)
    invalid("scan.ensemble", "requires harmonic rotation");

  if (!(dephasing.relative_spread >= 0.0)) invalid("dephasing.relative_spread", "must be non-negative");
  if (!(dephasing.truncation_sigmas > 0.0)) invalid("dephasing.truncation_sigmas", "must be positive");
  if (!(1.0 - dephasing.truncation_sigmas * dephasing.relative_spread > 0.0))
    invalid("dephasing.truncation_sigmas", "frequency distribution would reach omega <= 0");
  if (dephasing.samples < 1) invalid("dephasing.samples", "must be >= 1");

  if (noise.atom_count < 1) invalid("noise.atom_count", "must be >= 1");
  if (noise.repetitions < 1) invalid("noise.repetitions", "must be >= 1");
  if (execution.threads < 0) invalid("execution.threads", "must be >= 0");
  if (output_directory.empty()) invalid("output.directory", "must not be empty");
}

LatticeSpec RunConfig::lattice_spec() const {
  if (lattice.depth.in_recoil)
    return LatticeSpec::in_recoil_units(lattice.wavelength, lattice.intersection_angle, lattice.depth.value,
                                        lattice.mass);
  return LatticeSpec(lattice.wavelength, lattice.intersection_angle, lattice.depth.value, lattice.mass);
}

OscillatorSpec RunConfig::oscillator_spec(const LatticeSpec& spec) const {
  return OscillatorSpec(spec.mass(), oscillator.omega ? *oscillator.omega : spec.harmonic_frequency());
}

ScanGrid RunConfig::grid() const {
  return ScanGrid::uniform(scan.mode, scan.angle_count, scan.angle_span, scan.displacement_count,
                           scan.displacement_step);
}

PreparationConfig RunConfig::preparation_config(const LatticeSpec& spec) const {
  PreparationConfig c;
  c.kind = preparation.kind;
  c.contamination = preparation.contamination;
  c.shift = preparation.shift_is_phase ? PotentialShift::from_phase(preparation.shift, spec.period())
                                       : PotentialShift::from_displacement(preparation.shift, spec.period());
  c.hold_time = preparation.hold_time;
  c.populations = preparation.populations;
  c.finite_depth = preparation.finite_depth;
  c.model = preparation.model;
  return c;
}

DephasingModel RunConfig::dephasing_model(double mean_omega) const {
  DephasingModel m;
  m.mean_omega = mean_omega;
  m.relative_spread = dephasing.relative_spread;
  m.truncation_sigmas = dephasing.truncation_sigmas;
  m.sample_count = dephasing.samples;
  return m;
}

ScanOptions RunConfig::scan_options(const BoundStateBasis* basis) const {
  ScanOptions o;
  o.rotation = scan.rotation;
  o.basis = basis;
  o.execution = execution.parallel ? Execution::parallel : Execution::serial;
  o.threads = execution.threads;
  if (noise.enabled) o.noise = NoiseOptions{noise.atom_count, noise.seed, noise.repetitions};
  return o;
}

// ----------------------------------------------------------------------------
// Parsing

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("syntax error: {}", e.msg), {}, e.mark.line + 1, e.mark.column + 1);
  }

  Marks marks;
  RunConfig c;
  const Section top(root, "",
                    {"run_id", "lattice", "oscillator", "preparation", "scan", "dephasing", "noise", "execution",
                     "output"},
                    marks);
  c.run_id = top.text("run_id", c.run_id);

  const Section lat(top.child("lattice"), "lattice", {"wavelength", "intersection_angle", "depth", "mass"}, marks);
  c.lattice.wavelength = lat.si("wavelength", c.lattice.wavelength, Dimension::length);
  c.lattice.intersection_angle = lat.si("intersection_angle", c.lattice.intersection_angle, Dimension::angle);
  c.lattice.depth = lat.quantity("depth", c.lattice.depth, Dimension::energy);
  c.lattice.mass = lat.si("mass", c.lattice.mass, Dimension::mass);

  const Section osc(top.child("oscillator"), "oscillator", {"omega", "dim"}, marks);
  if (osc.has("omega")) c.oscillator.omega = osc.si("omega", 0.0, Dimension::angular_frequency);
  c.oscillator.dim = static_cast<int>(osc.integer("dim", c.oscillator.dim));

  const Section prep(top.child("preparation"), "preparation",
                     {"kind", "contamination", "shift", "hold_time", "populations", "finite_depth", "model",
                      "ground_width"},
                     marks);
  c.preparation.kind = prep.choice("kind", c.preparation.kind, kKinds);
  c.preparation.contamination = prep.number("contamination", c.preparation.contamination);
  if (prep.has("shift")) {
    // Either a lattice phase or a displacement.
    const auto node = prep.child("shift");
    const auto s = prep.text("shift", "");
    try {
      c.preparation.shift = units::parse(s, Dimension::angle).value;
      c.preparation.shift_is_phase = true;
    } catch (const std::invalid_argument&) {
      try {
        c.preparation.shift = units::parse(s, Dimension::length).value;
        c.preparation.shift_is_phase = false;
      } catch (const std::invalid_argument&) {
        fail_at("preparation.shift", node.Mark(), "expected an angle (rad, deg) or a length (m, um, nm)");
      }
    }
  }
  c.preparation.hold_time = prep.si("hold_time", c.preparation.hold_time, Dimension::time);
  c.preparation.populations = prep.numbers("populations");
  c.preparation.finite_depth = prep.flag("finite_depth", c.preparation.finite_depth);
  c.preparation.model = prep.choice("model", c.preparation.model, kModels);
  if (prep.has("ground_width")) c.preparation.ground_width = prep.si("ground_width", 0.0, Dimension::length);

  const Section sc(top.child("scan"), "scan",
                   {"mode", "angle_count", "angle_span", "displacement_count", "displacement_step", "bound_dim",
                    "rotation", "ensemble"},
                   marks);
  c.scan.mode = sc.choice("mode", c.scan.mode, kModes);
  c.scan.angle_count = static_cast<int>(sc.integer("angle_count", c.scan.angle_count));
  c.scan.angle_span = sc.si("angle_span", c.scan.angle_span, Dimension::angle);
  c.scan.displacement_count = static_cast<int>(sc.integer("displacement_count", c.scan.displacement_count));
  c.scan.displacement_step = sc.si("displacement_step", c.scan.displacement_step, Dimension::length);
  c.scan.bound_dim = static_cast<int>(sc.integer("bound_dim", c.scan.bound_dim));
  c.scan.rotation = sc.choice("rotation", c.scan.rotation, kRotations);
  c.scan.ensemble = sc.flag("ensemble", c.scan.ensemble);

  const Section deph(top.child("dephasing"), "dephasing", {"relative_spread", "truncation_sigmas", "samples"},
                     marks);
  c.dephasing.relative_spread = deph.number("relative_spread", c.dephasing.relative_spread);
  c.dephasing.truncation_sigmas = deph.number("truncation_sigmas", c.dephasing.truncation_sigmas);
  c.dephasing.samples = static_cast<int>(deph.integer("samples", c.dephasing.samples));

  const Section noise(top.child("noise"), "noise", {"mode", "atom_count", "seed", "repetitions"}, marks);
  if (noise.has("mode")) {
    const auto m = noise.text("mode", "exact");
    if (m != "exact" && m != "noise") fail_at("noise.mode", noise.child("mode").Mark(), "expected exact or noise");
    c.noise.enabled = m == "noise";
  }
  c.noise.atom_count = static_cast<long>(noise.integer("atom_count", c.noise.atom_count));
  if (noise.has("seed")) {
    const auto n = noise.child("seed");
    try {
      c.noise.seed = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail_at("noise.seed", n.Mark(), "expected a non-negative integer");
    }
  }
  c.noise.repetitions = static_cast<int>(noise.integer("repetitions", c.noise.repetitions));

  const Section exec(top.child("execution"), "execution", {"parallel", "threads"}, marks);
  c.execution.parallel = exec.flag("parallel", c.execution.parallel);
  c.execution.threads = static_cast<int>(exec.integer("threads", c.execution.threads));

  const Section out(top.child("output"), "output", {"directory"}, marks);
  c.output_directory = out.text("directory", c.output_directory);

  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto it = marks.find(e.key());
    if (it == marks.end()) throw;
    throw ConfigError(e.what(), e.key(), it->second.line + 1, it->second.column + 1);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config", path.string());
  return parse_config(buffer.str());
}

std::string emit_config(const RunConfig& c) {
  using units::format;
  std::string out;
  auto line = [&out](std::string_view indent, std::string_view key, const std::string& value) {
    out += fmt::format("{}{}: {}\n", indent, key, value);
  };
  line("", "run_id", c.run_id);
  out += "lattice:\n";
  line("  ", "wavelength", format({c.lattice.wavelength, false}, Dimension::length));
  line("  ", "intersection_angle", format({c.lattice.intersection_angle, false}, Dimension::angle));
  line("  ", "depth", format(c.lattice.depth, Dimension::energy));
  line("  ", "mass", format({c.lattice.mass, false}, Dimension::mass));
  out += "oscillator:\n";
  if (c.oscillator.omega) line("  ", "omega", format({*c.oscillator.omega, false}, Dimension::angular_frequency));
  line("  ", "dim", std::to_string(c.oscillator.dim));
  out += "preparation:\n";
  line("  ", "kind", spell(kKinds, c.preparation.kind));
  line("  ", "contamination", number_text(c.preparation.contamination));
  line("  ", "shift",
       format({c.preparation.shift, false}, c.preparation.shift_is_phase ? Dimension::angle : Dimension::length));
  line("  ", "hold_time", format({c.preparation.hold_time, false}, Dimension::time));
  if (!c.preparation.populations.empty()) {
    std::string list = "[";
    for (std::size_t i = 0; i < c.preparation.populations.size(); ++i)
      list += (i ? ", " : "") + number_text(c.preparation.populations[i]);
    line("  ", "populations", list + "]");
  }
  line("  ", "finite_depth", c.preparation.finite_depth ? "true" : "false");
  line("  ", "model", spell(kModels, c.preparation.model));
  if (c.preparation.ground_width)
    line("  ", "ground_width", format({*c.preparation.ground_width, false}, Dimension::length));
  out += "scan:\n";
  line("  ", "mode", spell(kModes, c.scan.mode));
  line("  ", "angle_count", std::to_string(c.scan.angle_count));
  line("  ", "angle_span", format({c.scan.angle_span, false}, Dimension::angle));
  line("  ", "displacement_count", std::to_string(c.scan.displacement_count));
  line("  ", "displacement_step", format({c.scan.displacement_step, false}, Dimension::length));
  line("  ", "bound_dim", std::to_string(c.scan.bound_dim));
  line("  ", "rotation", spell(kRotations, c.scan.rotation));
  line("  ", "ensemble", c.scan.ensemble ? "true" : "false");
  out += "dephasing:\n";
  line("  ", "relative_spread", number_text(c.dephasing.relative_spread));
  line("  ", "truncation_sigmas", number_text(c.dephasing.truncation_sigmas));
  line("  ", "samples", std::to_string(c.dephasing.samples));
  out += "noise:\n";
  line("  ", "mode", c.noise.enabled ? "noise" : "exact");
  line("  ", "atom_count", std::to_string(c.noise.atom_count));
  line("  ", "seed", std::to_string(c.noise.seed));
  line("  ", "repetitions", std::to_string(c.noise.repetitions));
  out += "execution:\n";
  line("  ", "parallel", c.execution.parallel ? "true" : "false");
  line("  ", "threads", std::to_string(c.execution.threads));
  out += "output:\n";
  line("  ", "directory", quoted(c.output_directory));
  return out;
}

RunConfig with_override(const RunConfig& config, std::string_view dotted_key, std::string_view value) {
  YAML::Node root = YAML::Load(emit_config(config));
  const std::string key(dotted_key);
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    root[key] = YAML::Load(std::string(value));
  } else {
    const std::string section = key.substr(0, dot);
    const std::string leaf = key.substr(dot + 1);
    if (leaf.find('.') != std::string::npos) throw ConfigError(key + ": keys nest at most one level", key);
    root[section][leaf] = YAML::Load(std::string(value));
  }
  std::stringstream ss;
  ss << root;
  return parse_config(ss.str());
}

}  // namespace phasetomo
