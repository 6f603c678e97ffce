#include <gtest/gtest.h>

#include "common.hpp"
#include "kinac/grazing.hpp"

using namespace kinac;
using testing_support::bimodal;

TEST(Grazing, TaylorStructure)
{
  const VelocityGrid g(6.0, 64);
  const auto s = fourier(bimodal(g));
  const auto t0 = taylor_structure_check(s, 0.0, std::nullopt);
  EXPECT_LT(t0.first_order, 1e-12);
  EXPECT_LT(t0.second_order_mismatch, 1e-12);
  const auto t1 = taylor_structure_check(s, 1.0, make_mollifier(g, 0.25));
  EXPECT_LT(t1.first_order, 1e-12);
  EXPECT_LT(t1.second_order_mismatch, 1e-9);
}

TEST(Grazing, SplitOperatorMatchesBruteForceQuadrature)
{
  const VelocityGrid g(6.0, 64);
  const auto s = fourier(bimodal(g));
  const auto cs = grazing_normalize(0.5, 0.2);
  GrazingConfig c;
  c.delta = 0.5;
  c.psi = make_mollifier(g, 0.5);
  const auto a = rhs_grazing(s, cs, c);
  const auto b = rhs_grazing_brute_force(s, cs, c);
  double diff = 0.0, scale = 0.0;
  for (int j = 0; j < g.N; ++j) {
    diff = std::max(diff, std::abs(a[j] - b[j]));
    scale = std::max(scale, std::abs(b[j]));
  }
  EXPECT_LT(diff, 2e-3 * scale);
}

TEST(Grazing, OperatorApproachesFokkerPlanckAsEpsShrinks)
{
  const VelocityGrid g(6.0, 64);
  const auto s = fourier(bimodal(g));
  GrazingConfig c;
  const auto fp = fp_limit_rhs(s, c);
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = rhs_grazing(s, grazing_normalize(0.5, eps), c);
    double d = 0.0;
    for (int j = 0; j < g.N; ++j)
      d = std::max(d, std::abs(r[j] - fp[j]));
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Grazing, RejectsBadConfiguration)
{
  const VelocityGrid g(6.0, 64);
  const auto s = fourier(bimodal(g));
  GrazingConfig c;
  c.theta_split = 1e-4;
  EXPECT_THROW(rhs_grazing(s, grazing_normalize(0.5, 0.2), c), std::invalid_argument);
  EXPECT_THROW(rhs_grazing(s, grazing_normalize(0.5, 0.2).with_cutoff(50), GrazingConfig{}),
               std::invalid_argument);
  GrazingSweep sw;
  sw.eps_list = {0.1, 0.2};
  EXPECT_THROW(sw.validate(), std::invalid_argument);
}
