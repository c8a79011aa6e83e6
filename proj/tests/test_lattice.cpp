#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "phasetomo/lattice.hpp"

using namespace phasetomo;

namespace {

constexpr double kPi = std::numbers::pi;
const double kMass = AtomicConstants{}.mass;
const double kAngle = 49.6 * kPi / 180.0;

// Hard-wall single well: E_n / E_r = b_{n+1}(U0 / 4E_r) + U0 / 2E_r with the
// odd Mathieu characteristic values b (tabulated independently).
struct MathieuLevels {
  double depth;
  double levels[5];
};

constexpr MathieuLevels kMathieu[] = {
    {17.5, {3.9225300448196725, 11.266925220555123, 18.010153806557852, 25.27456016720165, 34.14404069148996}},
    {37.0, {5.821241770795812, 16.890105344245985, 26.79026386014379, 35.826764631140065, 45.06015762858116}},
    {100.0, {9.74322101531584, 28.685139377750147, 46.47905847337863, 62.98648995274246, 78.06276589945433}},
};

}  // namespace

TEST(Lattice, GeometryChain) {
  const double k = lattice_vector(780e-9, kAngle);
  EXPECT_NEAR(k, 2.0 * kPi / 780e-9 * std::sin(0.5 * kAngle), 1e-6);
  EXPECT_NEAR(k / 3.38e6, 1.0, 0.005);
  const LatticeSpec spec = LatticeSpec::in_recoil_units(780e-9, kAngle, 37.0, kMass);
  EXPECT_NEAR(spec.period() / 0.93e-6, 1.0, 0.005);
  const double hbar = 1.054571817e-34;
  EXPECT_NEAR(spec.recoil(), hbar * hbar * k * k / (2.0 * kMass), 1e-45);
  EXPECT_NEAR(spec.depth_in_recoil(), 37.0, 1e-12);
  // (4/pi) sqrt(2 U0/E_r) E_r / hbar
  EXPECT_NEAR(spec.harmonic_frequency(), 4.0 / kPi * std::sqrt(2.0 * 37.0) * spec.recoil() / hbar, 1e-6);
  EXPECT_NEAR(spec.harmonic_frequency() / 48.33e3, 1.0, 0.05);
  EXPECT_THROW(lattice_vector(780e-9, 0.0), std::invalid_argument);
  EXPECT_THROW(lattice_vector(-1.0, 1.0), std::invalid_argument);
}

TEST(Lattice, DepthFrequencyAndIntensityInvert) {
  const double k = lattice_vector(780e-9, kAngle);
  const double u0 = 37.0 * recoil_energy(k, kMass);
  EXPECT_NEAR(depth_for_frequency(well_frequency(u0, kMass, k), kMass, k) / u0, 1.0, 1e-14);
  const AtomicConstants rb;
  const double detuning = -2.0 * kPi * 2e9;
  const double i0 = intensity_for_depth(u0, detuning, rb.linewidth, rb.saturation_intensity);
  EXPECT_NEAR(depth_from_intensity(i0, detuning, rb.linewidth, rb.saturation_intensity) / u0, 1.0, 1e-14);
  EXPECT_LT(i0, 0.0);  // sign follows the detuning
  EXPECT_THROW(depth_from_intensity(1.0, 0.0, rb.linewidth, rb.saturation_intensity), std::invalid_argument);
}

TEST(Lattice, LevelsMatchMathieuReference) {
  for (const auto& ref : kMathieu) {
    const LatticeSpec spec = LatticeSpec::in_recoil_units(780e-9, kAngle, ref.depth, kMass);
    const BoundStateBasis basis = solve_bound_states(spec);
    for (int n = 0; n < 5; ++n)
      EXPECT_NEAR(basis.energies[n] / spec.recoil(), ref.levels[n], 2e-5 * ref.levels[n]) << ref.depth << " " << n;
  }
}

TEST(Lattice, BoundCounts) {
  EXPECT_EQ(solve_bound_states(LatticeSpec::in_recoil_units(780e-9, kAngle, 17.5, kMass)).bound_count, 2);
  EXPECT_EQ(solve_bound_states(LatticeSpec::in_recoil_units(780e-9, kAngle, 37.0, kMass)).bound_count, 4);
}

TEST(Lattice, WavefunctionsAreOrthonormal) {
  const LatticeSpec spec = LatticeSpec::in_recoil_units(780e-9, kAngle, 37.0, kMass);
  const BoundStateBasis basis = solve_bound_states(spec, 512, 8);
  const Eigen::MatrixXd overlap = basis.wavefunctions.transpose() * basis.wavefunctions * basis.spacing;
  EXPECT_LT((overlap - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
  for (int n = 0; n < 8; ++n) EXPECT_GT(basis.wavefunctions(5, n), 0.0);
}

// The level spacing approaches the curvature frequency 2 sqrt(U0 E_r) as the
// well deepens, with the quartic correction -E_r.
TEST(Lattice, LevelSpacingApproachesHarmonicLimit) {
  double previous_gap = 1.0;
  for (double depth : {20.0, 40.0, 100.0, 200.0, 400.0}) {
    const LatticeSpec spec = LatticeSpec::in_recoil_units(780e-9, kAngle, depth, kMass);
    const BoundStateBasis basis = solve_bound_states(spec, 2048, 4);
    const double spacing = (basis.energies[1] - basis.energies[0]) / spec.recoil();
    const double curvature = 2.0 * std::sqrt(depth);
    const double gap = std::abs(spacing / curvature - 1.0);
    EXPECT_LT(gap, previous_gap) << depth;
    previous_gap = gap;
    if (depth == 100.0) {
      EXPECT_NEAR(spacing / (curvature - 1.0), 1.0, 0.03);
    }
  }
}

TEST(Lattice, EvolveInWell) {
  CVector c(2);
  c << Complex(0.6, 0.0), Complex(0.0, 0.8);
  const double energies[] = {1e-30, 3e-30};
  const double t = 1e-4;
  const CVector out = evolve_in_well(c, energies, t);
  EXPECT_NEAR(std::abs(out(1) - c(1) * std::polar(1.0, -3e-30 * t / kHbar)), 0.0, 1e-15);
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
  EXPECT_THROW(evolve_in_well(c, energies, -1.0), std::invalid_argument);
}

TEST(Lattice, ShiftedHamiltonian) {
  const LatticeSpec spec = LatticeSpec::in_recoil_units(780e-9, kAngle, 17.5, kMass);
  const BoundStateBasis basis = solve_bound_states(spec);
  const auto unshifted = shifted_hamiltonian_matrix(spec, basis, PotentialShift{});
  for (int n = 0; n < basis.level_count(); ++n)
    EXPECT_NEAR(unshifted.matrix(n, n).real() / spec.recoil(), basis.energies[n] / spec.recoil(), 1e-10);
  for (double leak : unshifted.leakage) EXPECT_NEAR(leak, 0.0, 1e-10);

  const auto shifted = shifted_hamiltonian_matrix(spec, basis, PotentialShift::from_phase(kPi / 3.0, spec.period()));
  ASSERT_EQ(shifted.leakage.size(), 2u);
  EXPECT_GT(shifted.leakage[0], 0.0);
  EXPECT_LT((shifted.matrix - shifted.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-40);
  EXPECT_THROW(shifted_hamiltonian_matrix(spec, basis, PotentialShift::from_displacement(spec.period(), spec.period())),
               std::invalid_argument);
}

TEST(Lattice, PotentialShiftConversion) {
  const double a = 0.93e-6;
  const auto s = PotentialShift::from_phase(kPi / 3.0, a);
  EXPECT_NEAR(s.displacement(), a / 6.0, 1e-20);
  EXPECT_NEAR(PotentialShift::from_displacement(s.displacement(), a).phase(), kPi / 3.0, 1e-14);
}
