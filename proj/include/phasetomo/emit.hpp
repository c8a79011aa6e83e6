#pragma once

// Bundle output: samples.csv, cross_section.csv, summary.json, config.yaml.
// Floating-point fields use 17 significant digits so tables re-read exactly.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasetomo/run.hpp"

namespace phasetomo {

inline constexpr const char* kSamplesHeader = "index,alpha_abs,theta,x_m,p0,p1,p_lost,value,upper,lower";
inline constexpr const char* kCrossSectionHeader = "run_id,label,angle,x_m,value,upper,lower";

struct SampleRow {
  std::size_t index = 0;
  double alpha_abs = 0.0;
  double theta = 0.0;
  double x_m = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double p_lost = 0.0;
  double value = 0.0;
  double upper = 0.0;
  double lower = 0.0;

  bool operator==(const SampleRow&) const = default;
};

std::vector<SampleRow> sample_rows(const ResultBundle& bundle);

std::string samples_csv(const ResultBundle& bundle);
// Cuts of every bundle, one row per point, keyed by run_id.
std::string cross_section_csv(std::span<const ResultBundle> bundles);
nlohmann::json summary_json(const ResultBundle& bundle);

// Writes the four files into `directory` (created if needed). Throws IoError.
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& directory);
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<SampleRow> read_samples_csv(const std::filesystem::path& path);
std::vector<SampleRow> parse_samples_csv(const std::string& text);

}  // namespace phasetomo
