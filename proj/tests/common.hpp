#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "kinac/state.hpp"

namespace testing_support {

inline kinac::Distribution gaussian(const kinac::VelocityGrid& g, double m = 1.0, double e = 1.0)
{
  const double s2 = e / m;
  return kinac::Distribution::sample(g, [&](double v) {
    return m / std::sqrt(2 * std::numbers::pi * s2) * std::exp(-v * v / (2 * s2));
  });
}

inline kinac::Distribution bimodal(const kinac::VelocityGrid& g, double a = 0.8, double s2 = 0.36)
{
  return kinac::Distribution::sample(g, [&](double v) {
    return 0.5 / std::sqrt(2 * std::numbers::pi * s2) *
           (std::exp(-(v - a) * (v - a) / (2 * s2)) + std::exp(-(v + a) * (v + a) / (2 * s2)));
  });
}

inline double l1(const std::vector<double>& q, double dv)
{
  double s = 0.0;
  for (double x : q)
    s += std::abs(x);
  return s * dv;
}

}  // namespace testing_support
