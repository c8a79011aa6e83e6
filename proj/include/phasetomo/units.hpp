#pragma once

// Unit-tagged scalars for the run-config format: "780 nm", "49.6 deg",
// "37 Er", "80 us". A bare number is rejected for dimensioned quantities.

#include <string>
#include <string_view>

namespace phasetomo::units {

enum class Dimension { length, angle, time, angular_frequency, energy, mass, intensity };

// SI value; for energies given in recoil units `in_recoil` is set and `value`
// stays in E_r until a lattice is known.
struct Quantity {
  double value = 0.0;
  bool in_recoil = false;

  bool operator==(const Quantity&) const = default;
};

// Throws std::invalid_argument naming the accepted units.
Quantity parse(std::string_view text, Dimension dim);

// Canonical spelling with 17 significant digits (m, rad, s, rad/s, J or Er, kg, W/m2).
std::string format(const Quantity& q, Dimension dim);

const char* dimension_name(Dimension dim);

}  // namespace phasetomo::units
