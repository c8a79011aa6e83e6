#include "phasetomo/units.hpp"

#include <cctype>
#include <charconv>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "phasetomo/oscillator.hpp"

namespace phasetomo::units {

namespace {

struct UnitEntry {
  Dimension dim;
  std::string_view name;
  double factor;
};

constexpr double kPi = std::numbers::pi;

constexpr UnitEntry kUnits[] = {
    {Dimension::length, "m", 1.0},
    {Dimension::length, "cm", 1e-2},
    {Dimension::length, "mm", 1e-3},
    {Dimension::length, "um", 1e-6},
    {Dimension::length, "\xC2\xB5m", 1e-6},
    {Dimension::length, "nm", 1e-9},
    {Dimension::angle, "rad", 1.0},
    {Dimension::angle, "mrad", 1e-3},
    {Dimension::angle, "deg", kPi / 180.0},
    {Dimension::time, "s", 1.0},
    {Dimension::time, "ms", 1e-3},
    {Dimension::time, "us", 1e-6},
    {Dimension::time, "\xC2\xB5s", 1e-6},
    {Dimension::time, "ns", 1e-9},
    {Dimension::angular_frequency, "rad/s", 1.0},
    {Dimension::angular_frequency, "krad/s", 1e3},
    {Dimension::angular_frequency, "Hz", 2.0 * kPi},
    {Dimension::angular_frequency, "kHz", 2.0 * kPi * 1e3},
    {Dimension::angular_frequency, "MHz", 2.0 * kPi * 1e6},
    {Dimension::energy, "J", 1.0},
    {Dimension::mass, "kg", 1.0},
    {Dimension::mass, "u", kAtomicMassUnit},
    {Dimension::intensity, "W/m2", 1.0},
    {Dimension::intensity, "mW/cm2", 10.0},
};

std::string accepted(Dimension dim) {
  std::string out;
  for (const auto& u : kUnits) {
    if (u.dim != dim) continue;
    if (!out.empty()) out += ", ";
    out += u.name;
  }
  if (dim == Dimension::energy) out += ", Er";
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

const char* dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::length: return "length";
    case Dimension::angle: return "angle";
    case Dimension::time: return "time";
    case Dimension::angular_frequency: return "angular frequency";
    case Dimension::energy: return "energy";
    case Dimension::mass: return "mass";
    case Dimension::intensity: return "intensity";
  }
  return "quantity";
}

Quantity parse(std::string_view text, Dimension dim) {
  const std::string_view s = trim(text);
  double number = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), number);
  if (ec != std::errc() || end == s.data())
    throw std::invalid_argument(fmt::format("expected a number with a {} unit, got '{}'", dimension_name(dim), s));
  const std::string_view unit = trim(std::string_view(end, static_cast<std::size_t>(s.data() + s.size() - end)));
  if (unit.empty())
    throw std::invalid_argument(
        fmt::format("missing unit in '{}' (accepted {} units: {})", s, dimension_name(dim), accepted(dim)));
  if (dim == Dimension::energy && unit == "Er") return {number, true};
  for (const auto& u : kUnits)
    if (u.dim == dim && u.name == unit) return {number * u.factor, false};
  throw std::invalid_argument(
      fmt::format("unknown unit '{}' (accepted {} units: {})", unit, dimension_name(dim), accepted(dim)));
}

std::string format(const Quantity& q, Dimension dim) {
  if (q.in_recoil) return fmt::format("{:.17g} Er", q.value);
  const char* unit = "";
  switch (dim) {
    case Dimension::length: unit = "m"; break;
    case Dimension::angle: unit = "rad"; break;
    case Dimension::time: unit = "s"; break;
    case Dimension::angular_frequency: unit = "rad/s"; break;
    case Dimension::energy: unit = "J"; break;
    case Dimension::mass: unit = "kg"; break;
    case Dimension::intensity: unit = "W/m2"; break;
  }
  return fmt::format("{:.17g} {}", q.value, unit);
}

}  // namespace phasetomo::units
