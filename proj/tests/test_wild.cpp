#include <gtest/gtest.h>

#include "common.hpp"
#include "kinac/collision_direct.hpp"
#include "kinac/wild.hpp"

using namespace kinac;
using testing_support::bimodal;

namespace {

CrossSection kernel() { return grazing_normalize(0.5, 0.2).with_cutoff(50.0); }

}  // namespace

TEST(Wild, CoefficientsAreCentralBinomialsOverPowersOfFour)
{
  const auto b = wild_coefficients(10);
  const double expected[] = {1, 1.0 / 2, 3.0 / 8, 5.0 / 16, 35.0 / 128, 63.0 / 256, 231.0 / 1024,
                             429.0 / 2048, 6435.0 / 32768, 12155.0 / 65536, 46189.0 / 262144};
  for (int k = 0; k <= 10; ++k)
    EXPECT_EQ(b[k], expected[k]);
}

TEST(Wild, TailIsMonotoneAndHorizonRespectsTolerance)
{
  EXPECT_NEAR(wild_tail(8, 0.0), 0.0, 1e-15);
  EXPECT_LT(wild_tail(8, 0.1), wild_tail(8, 0.2));
  EXPECT_GT(wild_tail(8, 0.2), wild_tail(16, 0.2));
  const double h = wild_horizon(16);
  EXPECT_LT(wild_tail(16, h), 1e-8);
  EXPECT_GE(wild_tail(16, 1.01 * h), 1e-8);
}

TEST(Wild, TrilinearIdentityAndBound)
{
  const VelocityGrid g(6.0, 64);
  const auto f = bimodal(g);
  const auto psi = make_mollifier(g, 0.25);
  const auto w = make_wild_setup(f, kernel(), 16, 0.5, psi);
  const auto P = p_trilinear(f, f, f, w);
  CollisionConfig cc;
  cc.delta = 0.5;
  cc.theta_nodes = 16;
  cc.mollified = true;
  cc.psi = psi;
  const auto Q = q_qbe(f, kernel(), cc);
  for (int i = 0; i < g.N; ++i)
    EXPECT_NEAR(P[i] - w.K() * f.values[i], Q[i], 1e-12);
  EXPECT_LE(testing_support::l1(P, g.dv()), w.C_P() * std::pow(mass(f), 3));
}

TEST(Wild, MarchAgreesWithDirectSolverAndConserves)
{
  const VelocityGrid g(6.0, 64);
  const auto f = bimodal(g);
  const auto psi = make_mollifier(g, 0.25);
  const auto cs = kernel();
  const auto traj = wild_march(f, make_wild_setup(f, cs, 16, 0.5, psi), 16, 0.1);
  EXPECT_NEAR(mass(traj.back().f), mass(f), 1e-13);
  EXPECT_NEAR(energy(traj.back().f), energy(f), 1e-13);

  CollisionConfig cc;
  cc.delta = 0.5;
  cc.theta_nodes = 16;
  cc.mollified = true;
  cc.psi = psi;
  RelaxOptions ro;
  ro.entropy_production = false;
  const auto d = relax(f, cs, cc, 0.1, 0.1 / 40, ro);
  EXPECT_LT(sup_distance(d.back().f, traj.back().f), 1e-7);
}

TEST(Wild, SolveRejectsStepBeyondHorizon)
{
  const VelocityGrid g(6.0, 64);
  const auto f = bimodal(g);
  const auto w = make_wild_setup(f, kernel(), 16, 0.0, make_mollifier(g, 0.25));
  EXPECT_THROW(wild_solve(f, w, 4, 10.0), std::domain_error);
}
