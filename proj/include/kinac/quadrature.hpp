#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace kinac {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const
  {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Gauss-Legendre rule with n nodes on [a, b], nodes in increasing order.
inline QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0)
{
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) {
      p1 = x;
      p0 = 1.0;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1)
    rule.nodes[n / 2] = mid;
  return rule;
}

/// Composite Gauss-Legendre over consecutive panels [breaks[i], breaks[i+1]].
/// `counts[i]` nodes are placed on panel i.
inline QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks,
                                               const std::vector<int>& counts)
{
  if (breaks.size() < 2 || counts.size() + 1 != breaks.size())
    throw std::invalid_argument("composite_gauss_legendre: panel/count mismatch");
  QuadratureRule rule;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    if (counts[p] < 1)
      continue;
    const auto panel = gauss_legendre(counts[p], breaks[p], breaks[p + 1]);
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

/// Splits [lo, hi] (0 < lo) into geometrically growing panels with ratio <= `ratio`.
inline std::vector<double> geometric_breaks(double lo, double hi, double ratio = 2.0)
{
  std::vector<double> b{lo};
  double x = lo;
  while (x * ratio < hi * (1.0 - 1e-12)) {
    x *= ratio;
    b.push_back(x);
  }
  b.push_back(hi);
  return b;
}

/// Distributes `total` nodes over `panels` panels as evenly as possible,
/// every panel receiving at least one node.
inline std::vector<int> spread_nodes(int total, std::size_t panels)
{
  std::vector<int> counts(panels, 0);
  if (panels == 0)
    return counts;
  const int base = std::max(1, total / static_cast<int>(panels));
  int left = std::max(0, total - base * static_cast<int>(panels));
  for (auto& c : counts) {
    c = base;
    if (left > 0) {
      ++c;
      --left;
    }
  }
  return counts;
}

/// Mirrors a rule on (0, a) into a rule on (-a, a) with node pairs (-x, x).
/// Negative nodes come first in decreasing-magnitude order, so that node j
/// and node size()-1-j are exact negatives of each other.
inline QuadratureRule mirror_rule(const QuadratureRule& half)
{
  QuadratureRule rule;
  const std::size_t n = half.size();
  rule.nodes.resize(2 * n);
  rule.weights.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[n - 1 - i] = -half.nodes[i];
    rule.weights[n - 1 - i] = half.weights[i];
    rule.nodes[n + i] = half.nodes[i];
    rule.weights[n + i] = half.weights[i];
  }
  return rule;
}

}  // namespace kinac
