#include <gtest/gtest.h>

#include "common.hpp"
#include "kinac/fokker_planck.hpp"

using namespace kinac;
using testing_support::bimodal;

TEST(FokkerPlanck, DiscreteEnergyIsExactlyConserved)
{
  const VelocityGrid g(6.0, 128);
  const auto f = bimodal(g);
  for (double delta : {0.0, 1.0}) {
    FPConfig c;
    c.delta = delta;
    const auto r = fp_rhs(f, c);
    double m = 0.0, e = 0.0;
    for (int i = 0; i < g.N; ++i) {
      m += r[i];
      e += g.v(i) * g.v(i) * r[i];
    }
    EXPECT_NEAR(m * g.dv(), 0.0, 1e-14);
    EXPECT_NEAR(e * g.dv(), 0.0, 1e-13);
  }
}

TEST(FokkerPlanck, EquilibriumResidualIsSecondOrder)
{
  double prev = 0.0;
  for (int N : {128, 256}) {
    const VelocityGrid g(6.0, N);
    const auto eq = bose_einstein_equilibrium(1.0, 1.0, 0.5, g);
    const double r = fp_steady_residual(eq.f, 0.5);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / r, 4.0, 0.2);
    }
    prev = r;
  }
  EXPECT_THROW(fp_steady_residual(Distribution(VelocityGrid(6.0, 64)), 0.5), std::domain_error);
}

TEST(FokkerPlanck, FourthMomentRelaxesAtExactRate)
{
  const VelocityGrid g(6.0, 256);
  const auto f = bimodal(g);
  FPOptions o;
  o.output_stride = 1 << 30;
  const auto traj = fp_evolve(f, FPConfig{}, 0.25, 0.0, o);
  const double exact = fp_fourth_moment_exact(mass(f), energy(f), fourth_moment(f), 0.25);
  EXPECT_NEAR(traj.back().M4 / exact, 1.0, 1e-3);
  EXPECT_NEAR(traj.back().mass, mass(f), 1e-14);
}

TEST(FokkerPlanck, FourierFormMatchesFluxForm)
{
  const VelocityGrid g(6.0, 128);
  const auto f = bimodal(g);
  FPConfig c;
  c.delta = 0.5;
  const auto fv = fourier_values(fp_rhs(f, c), g);
  const auto sp = fp_rhs_fourier(fourier(f), c);
  double diff = 0.0, scale = 0.0;
  for (int j = 0; j < g.N; ++j) {
    diff = std::max(diff, std::abs(fv[j] - sp[j]));
    scale = std::max(scale, std::abs(sp[j]));
  }
  EXPECT_LT(diff, 1e-2 * scale);
}

TEST(FokkerPlanck, SmallAngleTermsVanishWithoutMollifier)
{
  const VelocityGrid g(6.0, 64);
  const auto f = bimodal(g);
  FPConfig a;
  a.delta = 0.5;
  FPConfig b = a;
  b.small_angle_limit = true;
  EXPECT_EQ(fp_rhs(f, a), fp_rhs(f, b));
  FPConfig bad = a;
  bad.mollified = true;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
