#pragma once

#include <random>

#include "phasetomo/oscillator.hpp"

namespace phasetomo::testing {

// G G^dag / tr for a complex Gaussian G of size n, embedded in `dim` levels.
inline DensityMatrix random_density(int n, std::mt19937_64& rng, int dim = 0) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = Complex(g(rng), g(rng));
  CMatrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  DensityMatrix out(rho);
  return dim > n ? out.resized(dim) : out;
}

inline std::vector<double> random_populations(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) total += (x = u(rng));
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace phasetomo::testing
