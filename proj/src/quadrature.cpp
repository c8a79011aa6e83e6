#include "phasetomo/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phasetomo {

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  if (n == 1) return {{0.0}, {2.0}};
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return sum;
}

std::vector<double> periodic_angle_weights(std::span<const double> angles) {
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t n = angles.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = two_pi;
    return w;
  }
  const bool closed = std::abs(angles[n - 1] - angles[0] - two_pi) < 1e-9;
  if (closed) {
    w[0] = 0.5 * (angles[1] - angles[0]);
    w[n - 1] = 0.5 * (angles[n - 1] - angles[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (angles[i + 1] - angles[i - 1]);
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? angles[i + 1] : angles[0] + two_pi;
    const double prev = i > 0 ? angles[i - 1] : angles[n - 1] - two_pi;
    w[i] = 0.5 * (next - prev);
  }
  return w;
}

}  // namespace phasetomo
