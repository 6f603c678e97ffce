#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/quadrature.hpp"

namespace kinac {

enum class KernelKind { ConstantKac, PowerLaw, GrazingFamily };

/// Angular collision kernel beta(theta) on (-pi/2, pi/2).
struct CrossSection
{
  KernelKind kind = KernelKind::ConstantKac;
  double value = 1.0;          // ConstantKac
  double nu = 1.5;             // PowerLaw: beta = |theta|^{-(1+nu)}
  double eps = 0.1;            // GrazingFamily
  double mu = 0.5;             // GrazingFamily
  double normalization = 1.0;  // GrazingFamily
  std::optional<double> cutoff;
  // The kernel is integrated over (-edge, edge), edge = pi/2 - margin.
  double margin = 1e-3;

  static CrossSection constant(double v)
  {
    if (!(v >= 0.0))
      throw std::invalid_argument("constant kernel value must be nonnegative");
    CrossSection cs;
    cs.kind = KernelKind::ConstantKac;
    cs.value = v;
    return cs;
  }

  static CrossSection power_law(double nu)
  {
    if (!(nu > 1.0 && nu < 2.0))
      throw std::invalid_argument("power-law exponent nu must lie in (1, 2)");
    CrossSection cs;
    cs.kind = KernelKind::PowerLaw;
    cs.nu = nu;
    return cs;
  }

  static CrossSection grazing(double eps, double mu, double normalization = 1.0)
  {
    if (!(eps > 0.0))
      throw std::invalid_argument("grazing eps must be positive");
    if (!(mu > 0.0 && mu < 1.0))
      throw std::invalid_argument("grazing mu must lie in (0, 1)");
    if (!(normalization > 0.0))
      throw std::invalid_argument("grazing normalization must be positive");
    CrossSection cs;
    cs.kind = KernelKind::GrazingFamily;
    cs.eps = eps;
    cs.mu = mu;
    cs.normalization = normalization;
    return cs;
  }

  CrossSection with_cutoff(double n) const
  {
    if (!(n > 0.0))
      throw std::invalid_argument("cutoff level must be positive");
    CrossSection cs = *this;
    cs.cutoff = n;
    return cs;
  }

  CrossSection without_cutoff() const
  {
    CrossSection cs = *this;
    cs.cutoff.reset();
    return cs;
  }

  double edge() const { return std::numbers::pi / 2 - margin; }

  /// Inner boundary eps^{1/(1-mu)} of the grazing family.
  double inner_boundary() const { return std::pow(eps, 1.0 / (1.0 - mu)); }

  /// Exponent p of the |theta|^{-p} singularity at 0 (0 when regular).
  double singularity() const
  {
    switch (kind) {
      case KernelKind::ConstantKac: return 0.0;
      case KernelKind::PowerLaw: return 1.0 + nu;
      case KernelKind::GrazingFamily: return 2.0 + mu;
    }
    return 0.0;
  }

  /// Untruncated kernel value for theta != 0.
  double raw(double theta) const
  {
    const double a = std::abs(theta);
    switch (kind) {
      case KernelKind::ConstantKac:
        return value;
      case KernelKind::PowerLaw:
        return a == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(a, -(1.0 + nu));
      case KernelKind::GrazingFamily: {
        if (a == 0.0)
          return std::numeric_limits<double>::infinity();
        const double c = a <= inner_boundary() ? 2.0 * (1.0 - mu) / eps : (1.0 - mu) * eps;
        return normalization * c * std::pow(a, -(2.0 + mu));
      }
    }
    return 0.0;
  }

  bool integrable() const { return cutoff.has_value() || kind == KernelKind::ConstantKac; }

  /// Angle below which the cutoff clamps the kernel (0 when it never does).
  double clamp_angle() const
  {
    if (!cutoff || kind == KernelKind::ConstantKac)
      return 0.0;
    const double n = *cutoff;
    const double p = singularity();
    if (kind == KernelKind::PowerLaw)
      return std::min(std::pow(n, -1.0 / p), edge());
    // beta decreases on (0, inner] and on (inner, edge) with a downward jump.
    const double ti = inner_boundary();
    const double cin = normalization * 2.0 * (1.0 - mu) / eps;
    const double cout = normalization * (1.0 - mu) * eps;
    const double tin = std::pow(cin / n, 1.0 / p);
    if (tin <= ti)
      return tin;
    const double tout = std::pow(cout / n, 1.0 / p);
    if (tout <= ti)
      return ti;
    return std::min(tout, edge());
  }
};

/// beta(theta), or min(beta(theta), n) when a cutoff is set.
inline double evaluate(const CrossSection& cs, double theta)
{
  if (!(std::abs(theta) < std::numbers::pi / 2))
    throw std::domain_error("angle outside (-pi/2, pi/2)");
  const double b = cs.raw(theta);
  return cs.cutoff ? std::min(b, *cs.cutoff) : b;
}

struct AngularMoments
{
  double A = 0.0;
  double A_star = 0.0;
  double A_eta = 0.0;
  double eta = 0.0;
  double theta2 = 0.0;
  double cancellation = 0.0;  // int beta (1/cos - 1); +inf with zero margin
  double total = 0.0;         // int beta; +inf without cutoff
};

namespace detail {

/// Breakpoints on (0, edge): clamp angle, grazing inner boundary, then
/// geometric panels up to the edge.
inline std::vector<double> kernel_breaks(const CrossSection& cs, double ratio = 2.0)
{
  const double edge = cs.edge();
  std::vector<double> kinks;
  const double tc = cs.clamp_angle();
  if (tc > 0.0 && tc < edge)
    kinks.push_back(tc);
  if (cs.kind == KernelKind::GrazingFamily && cs.inner_boundary() < edge)
    kinks.push_back(cs.inner_boundary());
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  std::vector<double> b{0.0};
  if (cs.kind == KernelKind::ConstantKac) {
    b.push_back(edge);
    return b;
  }
  if (kinks.empty())
    kinks.push_back(std::min(0.05, edge / 2));
  kinks.push_back(edge);
  b.push_back(kinks.front());
  for (std::size_t k = 1; k < kinks.size(); ++k) {
    const auto g = geometric_breaks(kinks[k - 1], kinks[k], ratio);
    b.insert(b.end(), g.begin() + 1, g.end());
  }
  return b;
}

/// int_0^a theta^alpha g(theta) dtheta with smooth g, via s = theta^{alpha+1}.
template <typename G>
double singular_panel(double a, double alpha, G&& g, int nodes)
{
  const double q = alpha + 1.0;
  const auto rule = gauss_legendre(nodes, 0.0, std::pow(a, q));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double th = std::pow(rule.nodes[i], 1.0 / q);
    sum += rule.weights[i] * g(th);
  }
  return sum / q;
}

}  // namespace detail

/// Full-range integral of beta(theta) * w(theta) for an even weight w with
/// w(theta) = O(theta^order) at 0. Singular innermost panels are integrated
/// through the power substitution, everything else with Gauss-Legendre.
template <typename W>
double kernel_integral(const CrossSection& cs, W&& w, double order, int nodes)
{
  const auto b = detail::kernel_breaks(cs);
  const double tc = cs.clamp_angle();
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    const double lo = b[p], hi = b[p + 1];
    const bool singular = lo == 0.0 && cs.singularity() > 0.0 && tc == 0.0;
    if (singular) {
      const double alpha = order - cs.singularity();
      if (alpha <= -1.0)
        throw std::domain_error("non-integrable kernel");
      // beta(theta) w(theta) = theta^alpha * [beta theta^p * w theta^{-order}]
      sum += detail::singular_panel(
          hi, alpha,
          [&](double th) {
            return cs.raw(th) * std::pow(th, cs.singularity()) * w(th) * std::pow(th, -order);
          },
          nodes);
    } else {
      const auto rule = gauss_legendre(nodes, lo, hi);
      sum += rule.integrate([&](double th) { return evaluate(cs, th) * w(th); });
    }
  }
  return 2.0 * sum;
}

/// Default exponent for A_eta: the midpoint nu/2 of the admissible range
/// (nu - 1, 1); the grazing family behaves like nu = 1 + mu.
inline double default_eta(const CrossSection& cs)
{
  switch (cs.kind) {
    case KernelKind::PowerLaw: return cs.nu / 2;
    case KernelKind::GrazingFamily: return (1.0 + cs.mu) / 2;
    default: return 0.5;
  }
}

inline AngularMoments angular_moments(const CrossSection& cs, double eta, int quadrature_nodes)
{
  if (cs.kind == KernelKind::PowerLaw && !cs.cutoff)
    throw std::domain_error("non-integrable kernel");
  if (quadrature_nodes < 1)
    throw std::invalid_argument("quadrature_nodes must be positive");
  AngularMoments m;
  m.eta = eta;
  const int n = quadrature_nodes;
  m.A = kernel_integral(cs, [](double t) { return std::cos(t) * std::sin(t) * std::sin(t); }, 2.0, n);
  m.A_star = kernel_integral(
      cs, [](double t) { const double s = std::sin(2 * t); return 0.25 * s * s; }, 2.0, n);
  m.A_eta = kernel_integral(
      cs, [eta](double t) { return std::cos(t) * std::pow(std::abs(std::sin(t)), 1.0 + eta); },
      1.0 + eta, n);
  m.theta2 = kernel_integral(cs, [](double t) { return t * t; }, 2.0, n);
  if (cs.margin > 0.0)
    m.cancellation = kernel_integral(cs, [](double t) { return 1.0 / std::cos(t) - 1.0; }, 2.0, n);
  else
    m.cancellation = std::numeric_limits<double>::infinity();
  if (cs.integrable())
    m.total = kernel_integral(cs, [](double) { return 1.0; }, 0.0, n);
  else
    m.total = std::numeric_limits<double>::infinity();
  return m;
}

inline AngularMoments angular_moments(const CrossSection& cs, int quadrature_nodes = 24)
{
  return angular_moments(cs, default_eta(cs), quadrature_nodes);
}

/// Grazing family normalized so that the one-sided integral of beta theta^2
/// over (0, edge) equals one, i.e. the full-range theta2 moment equals two.
/// Inner and outer pieces are integrated in closed form.
inline CrossSection grazing_normalize(double mu, double eps, double margin = 1e-3)
{
  auto cs = CrossSection::grazing(eps, mu, 1.0);
  cs.margin = margin;
  const double ti = std::min(cs.inner_boundary(), cs.edge());
  const double q = 1.0 - mu;
  const double inner = 2.0 * q / eps * std::pow(ti, q) / q;
  const double outer = q * eps * (std::pow(cs.edge(), q) - std::pow(ti, q)) / q;
  cs.normalization = 1.0 / (inner + outer);
  return cs;
}

/// int_{|theta| <= a} beta theta^2 for the untruncated grazing family.
inline double grazing_theta2_within(const CrossSection& cs, double a)
{
  const double q = 1.0 - cs.mu;
  const double ti = cs.inner_boundary();
  const double lo = std::min(a, ti);
  double s = 2.0 * q / cs.eps * std::pow(lo, q) / q;
  if (a > ti)
    s += q * cs.eps * (std::pow(a, q) - std::pow(ti, q)) / q;
  return 2.0 * cs.normalization * s;
}

/// Symmetric angular quadrature over (-edge, edge) with `nodes` points
/// (rounded up to even), nodes placed on kernel panels, weights including beta.
/// Points j and size()-1-j are exact negatives of each other.
struct AngularRule
{
  std::vector<double> theta;
  std::vector<double> weight;  // w_j * beta(theta_j)
  std::size_t size() const { return theta.size(); }
  double total() const
  {
    double s = 0.0;
    for (double w : weight)
      s += w;
    return s;
  }
};

/// Rule over the annulus lo < |theta| < edge (lo = 0 for the whole range).
inline AngularRule angular_rule(const CrossSection& cs, int nodes, double lo = 0.0)
{
  if (!cs.integrable() && lo <= 0.0)
    throw std::domain_error("non-integrable kernel");
  const int half = std::max(1, (nodes + 1) / 2);
  std::vector<double> b;
  for (double x : detail::kernel_breaks(cs))
    if (x > lo)
      b.push_back(x);
  b.insert(b.begin(), lo);
  if (lo > 0.0) {
    // grade the near-singular end geometrically
    std::vector<double> g{lo};
    for (std::size_t i = 1; i < b.size(); ++i) {
      const auto gb = geometric_breaks(g.back(), b[i], 2.0);
      g.insert(g.end(), gb.begin() + 1, gb.end());
    }
    b = g;
  }
  const auto counts = spread_nodes(half, b.size() - 1);
  const auto h = composite_gauss_legendre(b, counts);
  const auto full = mirror_rule(h);
  AngularRule r;
  r.theta = full.nodes;
  r.weight.resize(full.size());
  for (std::size_t j = 0; j < full.size(); ++j)
    r.weight[j] = full.weights[j] * evaluate(cs, full.nodes[j]);
  return r;
}

}  // namespace kinac
