#pragma once

#include <span>
#include <vector>

namespace phasetomo {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Newton iteration on P_n started from the Tricomi estimate of each root.
GaussLegendreRule gauss_legendre(int n);

// Composite trapezoid over an arbitrary (sorted) abscissa.
double trapezoid(std::span<const double> x, std::span<const double> f);

// Weights for integrating a 2*pi-periodic function sampled at sorted angles.
// When the last angle equals first + 2*pi the duplicated ray is handled as a
// closed trapezoid; otherwise the gap to first + 2*pi is wrapped.
std::vector<double> periodic_angle_weights(std::span<const double> angles);

}  // namespace phasetomo
