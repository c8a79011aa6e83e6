#include "phasetomo/emit.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "phasetomo/errors.hpp"

namespace phasetomo {

namespace {

std::string g17(double v) { return fmt::format("{:.17g}", v); }

const char* mode_name(ScanMode m) { return m == ScanMode::husimi ? "husimi" : "wigner"; }

}  // namespace

std::vector<SampleRow> sample_rows(const ResultBundle& b) {
  if (b.records.size() != b.samples.size()) throw std::logic_error("bundle record and sample tables differ in size");
  std::vector<SampleRow> rows;
  rows.reserve(b.samples.size());
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto& r = b.records[i];
    const auto& s = b.samples[i];
    rows.push_back({s.index, s.alpha_abs, s.theta, s.displacement, r.p0, r.p1, r.p_lost, s.value, s.upper, s.lower});
  }
  return rows;
}

std::string samples_csv(const ResultBundle& b) {
  std::string out = kSamplesHeader;
  out += '\n';
  for (const auto& r : sample_rows(b))
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.index, g17(r.alpha_abs), g17(r.theta), g17(r.x_m),
                       g17(r.p0), g17(r.p1), g17(r.p_lost), g17(r.value), g17(r.upper), g17(r.lower));
  return out;
}

std::string cross_section_csv(std::span<const ResultBundle> bundles) {
  std::string out = kCrossSectionHeader;
  out += '\n';
  for (const auto& b : bundles)
    for (const auto& c : b.cuts)
      for (std::size_t i = 0; i < c.cut.position.size(); ++i)
        out += fmt::format("{},{},{},{},{},{},{}\n", b.config.run_id, c.label, g17(c.cut.angle),
                           g17(c.cut.position[i]), g17(c.cut.value[i]), g17(c.cut.upper[i]), g17(c.cut.lower[i]));
  return out;
}

nlohmann::json summary_json(const ResultBundle& b) {
  nlohmann::json j;
  j["run_id"] = b.config.run_id;
  j["version"] = b.version;
  j["mode"] = mode_name(b.config.scan.mode);
  j["noise"] = b.config.noise.enabled ? "noise" : "exact";
  j["seed"] = b.config.noise.seed;
  j["oscillator"] = {{"omega_rad_s", b.omega}, {"x0_m", b.x0}};
  j["lattice"] = {{"bound_count", b.bound_count}};
  j["preparation"] = {{"loss", b.preparation_loss}, {"trace", b.rho.trace()}};
  j["grid"] = {{"angles", b.grid.angles.size()}, {"displacements", b.grid.displacements.size()},
               {"points", b.grid.size()}};
  if (b.peak)
    j["peak"] = {{"index", b.peak->index},
                 {"alpha_abs", b.peak->alpha_abs},
                 {"theta", b.peak->theta},
                 {"x_m", b.peak->displacement},
                 {"value", b.peak->value}};
  j["fits"] = nlohmann::json::array();
  for (const auto& f : b.fits)
    j["fits"].push_back({{"label", f.label},
                         {"angle", f.angle},
                         {"amplitude", f.fit.amplitude},
                         {"center_m", {f.center_x, f.center_p}},
                         {"width_m", f.fit.width},
                         {"residual_norm", f.fit.residual_norm},
                         {"iterations", f.fit.iterations}});
  if (b.normalization)
    j["normalization"] = {{"value", b.normalization->value},
                          {"upper", b.normalization->upper},
                          {"lower", b.normalization->lower},
                          {"ordered", b.normalization->ordered}};
  if (b.xrms)
    j["x_rms"] = {{"x_rms_m", b.xrms->x_rms},
                  {"ratio_to_x0", b.xrms->x_rms / b.x0},
                  {"edge_ratio", b.xrms->edge_ratio},
                  {"extrapolated", b.xrms->extrapolated}};
  j["warnings"] = b.warnings;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed", path.string());
}

void write_bundle(const ResultBundle& b, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", directory.string());
  write_text(directory / "samples.csv", samples_csv(b));
  write_text(directory / "cross_section.csv", cross_section_csv(std::span<const ResultBundle>(&b, 1)));
  write_text(directory / "summary.json", summary_json(b).dump(2) + "\n");
  write_text(directory / "config.yaml", b.config_echo);
}

std::vector<SampleRow> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSamplesHeader) throw std::invalid_argument("samples.csv: bad header");
  std::vector<SampleRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      fields.push_back(rest.substr(0, pos));
    fields.push_back(rest);
    if (fields.size() != 10) throw std::invalid_argument(fmt::format("samples.csv:{}: expected 10 fields", line_no));
    SampleRow r;
    auto num = [&](std::string_view f, auto& target) {
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), target);
      if (ec != std::errc() || end != f.data() + f.size())
        throw std::invalid_argument(fmt::format("samples.csv:{}: bad number '{}'", line_no, f));
    };
    num(fields[0], r.index);
    num(fields[1], r.alpha_abs);
    num(fields[2], r.theta);
    num(fields[3], r.x_m);
    num(fields[4], r.p0);
    num(fields[5], r.p1);
    num(fields[6], r.p_lost);
    num(fields[7], r.value);
    num(fields[8], r.upper);
    num(fields[9], r.lower);
    rows.push_back(r);
  }
  return rows;
}

std::vector<SampleRow> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open", path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_samples_csv(buffer.str());
}

}  // namespace phasetomo
