#include <gtest/gtest.h>

#include "common.hpp"
#include "kinac/state.hpp"

using namespace kinac;
using testing_support::gaussian;

TEST(State, GridLayout)
{
  const VelocityGrid g(6.0, 64);
  EXPECT_DOUBLE_EQ(g.v(0), -6.0);
  EXPECT_DOUBLE_EQ(g.v(32), 0.0);
  EXPECT_DOUBLE_EQ(g.xi(32), 0.0);
  EXPECT_THROW(VelocityGrid(6.0, 100), std::invalid_argument);
}

TEST(State, GaussianMoments)
{
  const auto f = gaussian(VelocityGrid(12.0, 256), 2.0, 3.0);
  EXPECT_NEAR(mass(f), 2.0, 1e-12);
  EXPECT_NEAR(energy(f), 3.0, 1e-12);
  EXPECT_NEAR(fourth_moment(f), 3.0 * 9.0 / 2.0, 1e-10);
}

TEST(State, FourierRoundTrip)
{
  const auto f = testing_support::bimodal(VelocityGrid(6.0, 128));
  const auto s = fourier(f);
  EXPECT_NEAR(s.values[64].real(), mass(f), 1e-14);
  const auto back = inverse_fourier(s);
  EXPECT_LT(sup_distance(back, f), 1e-14);
}

TEST(State, MollifierHasUnitMassAndMatchesTransform)
{
  const VelocityGrid g(6.0, 128);
  const auto psi = make_mollifier(g, 0.25);
  EXPECT_NEAR(mass(psi.values), 1.0, 1e-14);
  const auto f = testing_support::bimodal(g);
  const auto a = mollify(f, psi);
  EXPECT_NEAR(mass(a), mass(f), 1e-14);
  auto s = fourier(f);
  for (int j = 0; j < g.N; ++j)
    s.values[j] *= psi.fourier[j];
  EXPECT_LT(sup_distance(inverse_fourier(s), a), 1e-13);
  EXPECT_THROW(make_mollifier(g, 2.0), std::invalid_argument);
}

TEST(State, BoseEinsteinEquilibriumSolvesMoments)
{
  const VelocityGrid g(6.0, 256);
  for (double delta : {0.0, 0.5, 2.0}) {
    const auto eq = bose_einstein_equilibrium(1.0, 1.0, delta, g);
    EXPECT_NEAR(mass(eq.f), 1.0, 1e-12);
    EXPECT_NEAR(energy(eq.f), 1.0, 1e-12);
    EXPECT_LT(eq.params.a * delta, 1.0);
  }
  // delta = 0 is the Maxwellian
  const auto eq = bose_einstein_equilibrium(1.0, 1.0, 0.0, g);
  EXPECT_NEAR(eq.params.b, 0.5, 1e-6);  // tails cut at |v| = 6
}

TEST(State, EntropyPrefersEquilibrium)
{
  const VelocityGrid g(6.0, 128);
  const double delta = 0.5;
  const auto eq = bose_einstein_equilibrium(1.0, 1.0, delta, g);
  EXPECT_GT(entropy(eq.f, delta), entropy(testing_support::bimodal(g), delta));
}

TEST(State, GammaIsNonnegativeAndFinite)
{
  EXPECT_EQ(gamma_fn(0.0, 0.0), 0.0);
  EXPECT_GT(gamma_fn(1.0, 0.0), 0.0);
  EXPECT_TRUE(std::isfinite(gamma_fn(1.0, 0.0)));
  EXPECT_NEAR(gamma_fn(2.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_GE(gamma_fn(0.3, 0.7), 0.0);
}
