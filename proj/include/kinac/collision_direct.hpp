#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kinac/cross_section.hpp"
#include "kinac/parallel.hpp"
#include "kinac/state.hpp"

namespace kinac {

/// How a post-collision velocity is spread onto grid nodes.
/// Cubic: four-node Lagrange weights, exact for 1, v, v^2, v^3 (accurate,
/// weights of both signs). Linear: two nodes, linear in v^2 (nonnegative
/// weights, conserves 1 and v^2 only, first-order numerical diffusion).
enum class Deposit { Cubic, Linear };

struct CollisionConfig
{
  double delta = 0.0;
  Deposit deposit = Deposit::Cubic;
  int theta_nodes = 32;
  bool mollified = false;
  std::optional<Mollifier> psi;

  void validate() const
  {
    if (!(delta >= 0.0))
      throw std::invalid_argument("delta must be nonnegative");
    if (theta_nodes < 2 || theta_nodes % 2 != 0)
      throw std::invalid_argument("theta_nodes must be a positive even number");
    if (mollified && !psi)
      throw std::invalid_argument("mollified operator requires a mollifier");
  }
};

/// Kac rotation (v, v*) -> (v cos - v* sin, v sin + v* cos).
inline std::pair<double, double> rotate(double v, double vs, double theta)
{
  const double c = std::cos(theta), s = std::sin(theta);
  return {v * c - vs * s, v * s + vs * c};
}

/// The quantum factor g: f itself, or its mollification.
inline std::vector<double> quantum_factor(const Distribution& f, const CollisionConfig& cfg)
{
  if (cfg.mollified)
    return mollify(f, *cfg.psi).values;
  return f.values;
}

namespace detail {

/// Linear interpolation in centred index units u = v/dv (node l sits at u = l).
struct Lerp
{
  int i;     // array index of the lower node
  double w;  // weight of the upper node
};

inline Lerp lerp_at(double u, int half)
{
  const double fl = std::floor(u);
  return {static_cast<int>(fl) + half, u - fl};
}

inline double lerp_value(const double* g, const Lerp& p)
{
  return (1.0 - p.w) * g[p.i] + p.w * g[p.i + 1];
}

}  // namespace detail

/// Enumerates all in-grid binary collisions (theta_j, v_a, v_b) for a fixed
/// angular node and accumulates the weak-form collision operator into acc:
/// each collision of rate R = rate(a, b, u', u*') moves mass R from node a to
/// the deposit of v'. Collisions whose outgoing velocities leave the deposit
/// range are skipped; the rule is symmetric under (a, b, theta) -> (b, a, -theta),
/// which makes the scheme conserve energy exactly on symmetric angular nodes.
template <Deposit D, typename Rate>
void collide_node(const VelocityGrid& grid, double theta, const std::vector<char>& active,
                  std::vector<double>& acc, Rate&& rate)
{
  const int N = grid.N, h = N / 2;
  const double c = std::cos(theta), s = std::sin(theta);
  const double lo = D == Deposit::Cubic ? -h + 1 : -h;
  const double hi = D == Deposit::Cubic ? N - 2 - h : N - 1 - h;
  for (int a = 0; a < N; ++a) {
    if (!active[a])
      continue;
    const double ua = a - h;
    double out = 0.0;
    for (int b = 0; b < N; ++b) {
      if (!active[b])
        continue;
      const double ub = b - h;
      const double up = ua * c - ub * s;
      const double usp = ua * s + ub * c;
      if (up < lo || up >= hi || usp < lo || usp >= hi)
        continue;
      const double R = rate(a, b, up, usp);
      const double fl = std::floor(up);
      const int i = static_cast<int>(fl) + h;
      if constexpr (D == Deposit::Cubic) {
        const double t = up - fl;
        const double tm = t - 1.0, t2 = t - 2.0, tp = t + 1.0;
        acc[i - 1] -= t * tm * t2 / 6.0 * R;
        acc[i] += tp * tm * t2 / 2.0 * R;
        acc[i + 1] -= tp * t * t2 / 2.0 * R;
        acc[i + 2] += tp * t * tm / 6.0 * R;
      } else {
        const double w = (up * up - fl * fl) / (2.0 * fl + 1.0);
        acc[i] += (1.0 - w) * R;
        acc[i + 1] += w * R;
      }
      out += R;
    }
    acc[a] -= out;
  }
}

template <typename Rate>
void collide_node(Deposit d, const VelocityGrid& grid, double theta,
                  const std::vector<char>& active, std::vector<double>& acc, Rate&& rate)
{
  if (d == Deposit::Cubic)
    collide_node<Deposit::Cubic>(grid, theta, active, acc, rate);
  else
    collide_node<Deposit::Linear>(grid, theta, active, acc, rate);
}

/// Collision operator in weak (collision-pair) form with rate
/// f_a f_b (1 + delta g(v') + delta g(v*')), g = f or its mollification.
/// Summed over angular nodes in fixed order, so the result does not depend
/// on the number of worker threads.
inline std::vector<double> q_qbe(const Distribution& f, const AngularRule& rule,
                                 const CollisionConfig& cfg)
{
  const auto& grid = f.grid;
  const int N = grid.N, h = N / 2;
  const auto gvec = quantum_factor(f, cfg);
  const double* g = gvec.data();
  const double* fv = f.values.data();
  const double delta = cfg.delta;
  std::vector<char> active(N);
  for (int i = 0; i < N; ++i)
    active[i] = fv[i] != 0.0;
  std::vector<std::vector<double>> part(rule.size(), std::vector<double>(N, 0.0));
  parallel_for(rule.size(), [&](std::size_t j) {
    collide_node(cfg.deposit, grid, rule.theta[j], active, part[j], [&](int a, int b, double up, double usp) {
      const double gp = detail::lerp_value(g, detail::lerp_at(up, h));
      const double gs = detail::lerp_value(g, detail::lerp_at(usp, h));
      return fv[a] * fv[b] * (1.0 + delta * (gp + gs));
    });
  });
  std::vector<double> Q(N, 0.0);
  const double dv = grid.dv();
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double w = rule.weight[j] * dv;
    for (int i = 0; i < N; ++i)
      Q[i] += w * part[j][i];
  }
  return Q;
}

inline std::vector<double> q_qbe(const Distribution& f, const CrossSection& cs,
                                 const CollisionConfig& cfg)
{
  if (!cs.integrable())
    throw std::domain_error("direct collision operator needs a cutoff kernel");
  cfg.validate();
  return q_qbe(f, angular_rule(cs, cfg.theta_nodes), cfg);
}

enum class CollisionForm { Product, Reduced };

/// Pointwise (strong-form) operator at every node, with rotated values by
/// linear interpolation (zero outside the grid). Product form keeps the
/// quartic terms (1 + delta g)(1 + delta g*); the reduced form drops them.
inline std::vector<double> q_qbe_pointwise(const Distribution& f, const CrossSection& cs,
                                           const CollisionConfig& cfg, CollisionForm form)
{
  if (!cs.integrable())
    throw std::domain_error("direct collision operator needs a cutoff kernel");
  cfg.validate();
  const auto rule = angular_rule(cs, cfg.theta_nodes);
  const auto& grid = f.grid;
  const int N = grid.N;
  const auto g = quantum_factor(f, cfg);
  const double delta = cfg.delta;
  std::vector<std::vector<double>> part(rule.size(), std::vector<double>(N, 0.0));
  parallel_for(rule.size(), [&](std::size_t j) {
    const double c = std::cos(rule.theta[j]), s = std::sin(rule.theta[j]);
    for (int i = 0; i < N; ++i) {
      const double v = grid.v(i);
      double acc = 0.0;
      for (int k = 0; k < N; ++k) {
        const double vs = grid.v(k);
        const double vp = v * c - vs * s, vsp = v * s + vs * c;
        const double fp = interpolate(f.values, grid, vp), fsp = interpolate(f.values, grid, vsp);
        const double gp = interpolate(g, grid, vp), gsp = interpolate(g, grid, vsp);
        const double ff = f.values[i] * f.values[k];
        if (form == CollisionForm::Product)
          acc += fp * fsp * (1 + delta * g[i]) * (1 + delta * g[k]) -
                 ff * (1 + delta * gp) * (1 + delta * gsp);
        else
          acc += fp * fsp * (1 + delta * (g[i] + g[k])) - ff * (1 + delta * (gp + gsp));
      }
      part[j][i] = rule.weight[j] * acc;
    }
  });
  std::vector<double> Q(N, 0.0);
  for (std::size_t j = 0; j < rule.size(); ++j)
    for (int i = 0; i < N; ++i)
      Q[i] += part[j][i] * grid.dv();
  return Q;
}

/// Loss-rate constant K = m (1 + 2 delta G) int beta, with G the sup bound of
/// the quantum factor: m ||psi|| (mollified) or ||f0|| (unmollified).
inline double loss_rate_constant(const Distribution& f0, const AngularRule& rule,
                                 const CollisionConfig& cfg)
{
  const double m = mass(f0);
  double G = 0.0;
  if (cfg.mollified)
    G = m * cfg.psi->sup_norm;
  else
    for (double x : f0.values)
      G = std::max(G, x);
  return m * (1.0 + 2.0 * cfg.delta * G) * rule.total();
}

struct EntropyReport
{
  double H = 0.0;
  double D = 0.0;
  double t = 0.0;
};

struct TrajectoryPoint
{
  double t = 0.0;
  Distribution f;
  double mass = 0.0;
  double energy = 0.0;
  double M4 = 0.0;
  EntropyReport entropy;
  double clipped_mass = 0.0;  // cumulative
};

struct RelaxOptions
{
  int output_stride = 1;
  bool entropy_production = true;  // D is O(N^2 theta_nodes) per output
  double mass_tolerance = 1e-6;
  double clip_tolerance = 1e-6;  // clipped mass per unit time, relative to m
};

struct SolverAbort : std::runtime_error
{
  std::string invariant;
  double t;
  SolverAbort(const std::string& inv, const std::string& msg, double time)
      : std::runtime_error(msg), invariant(inv), t(time)
  {
  }
};

/// Classical fourth-order Runge-Kutta step for an autonomous system.
template <typename Rhs>
std::vector<double> rk4_step(const std::vector<double>& y, double dt, Rhs&& rhs)
{
  const std::size_t n = y.size();
  auto k1 = rhs(y);
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + 0.5 * dt * k1[i];
  auto k2 = rhs(tmp);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + 0.5 * dt * k2[i];
  auto k3 = rhs(tmp);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + dt * k3[i];
  auto k4 = rhs(tmp);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

/// Number of steps of size at most dt covering [0, T].
inline int step_count(double T, double dt)
{
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

/// RK4 relaxation of df/dt = Q(f) on [0, T]. Negative undershoots are clipped
/// and the clipped mass is accumulated; mass drift and excessive clipping abort.
inline std::vector<TrajectoryPoint> relax(const Distribution& f0, const CrossSection& cs,
                                          const CollisionConfig& cfg, double T, double dt,
                                          const RelaxOptions& opt = {})
{
  if (!cs.integrable())
    throw std::domain_error("direct relaxation needs a cutoff kernel");
  cfg.validate();
  const auto rule = angular_rule(cs, cfg.theta_nodes);
  const double K = loss_rate_constant(f0, rule, cfg);
  if (dt > 1.0 / (2.0 * K) * (1 + 1e-12))
    throw std::invalid_argument("time step exceeds stability bound 1/(2K) = " +
                                std::to_string(1.0 / (2.0 * K)));
  const int steps = step_count(T, dt);
  const double h = T / steps;
  const double m0 = mass(f0);

  auto record = [&](double t, const Distribution& f, double clipped) {
    TrajectoryPoint p;
    p.t = t;
    p.f = f;
    p.mass = mass(f);
    p.energy = energy(f);
    p.M4 = fourth_moment(f);
    p.entropy.t = t;
    p.entropy.H = entropy(f, cfg.delta);
    if (opt.entropy_production)
      p.entropy.D = entropy_production(f, cs, cfg.delta, cfg.theta_nodes);
    p.clipped_mass = clipped;
    return p;
  };

  std::vector<TrajectoryPoint> traj;
  Distribution f = f0;
  double clipped = 0.0;
  traj.push_back(record(0.0, f, clipped));
  for (int n = 1; n <= steps; ++n) {
    f.values = rk4_step(f.values, h, [&](const std::vector<double>& y) {
      return q_qbe(Distribution(f.grid, y), rule, cfg);
    });
    for (auto& x : f.values)
      if (x < 0.0) {
        clipped += -x * f.grid.dv();
        x = 0.0;
      }
    const double t = n * h;
    const double m = mass(f);
    if (std::abs(m - m0) > opt.mass_tolerance * m0)
      throw SolverAbort("mass", "relative mass drift " + std::to_string((m - m0) / m0), t);
    if (clipped > opt.clip_tolerance * m0 * std::max(t, 1.0))
      throw SolverAbort("positivity", "clipped mass " + std::to_string(clipped), t);
    if (n % opt.output_stride == 0 || n == steps)
      traj.push_back(record(t, f, clipped));
  }
  return traj;
}

/// lhs = int beta int int f*(f - f') dv dv* dtheta by plain quadrature (v over
/// the whole preimage of the grid), rhs = ||f||^2 int beta (1 - 1/cos).
inline std::pair<double, double> cancellation_identity_check(const Distribution& f,
                                                             const CrossSection& cs,
                                                             int theta_nodes)
{
  const auto rule = angular_rule(cs, theta_nodes);
  const auto& grid = f.grid;
  const int N = grid.N;
  const double dv = grid.dv();
  const double L = grid.L;
  const double m1 = [&] {
    double s = 0.0;
    for (double x : f.values)
      s += std::abs(x);
    return s * dv;
  }();
  std::vector<double> part(rule.size(), 0.0);
  parallel_for(rule.size(), [&](std::size_t j) {
    const double c = std::cos(rule.theta[j]), s = std::sin(rule.theta[j]);
    const double R = (L + L * std::abs(s)) / c;
    const int M = static_cast<int>(std::ceil(R / dv));
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      if (f.values[k] == 0.0)
        continue;
      const double vs = grid.v(k);
      double inner = 0.0;
      for (int i = -M; i <= M; ++i) {
        const double v = i * dv;
        const double fv = (i + N / 2 >= 0 && i + N / 2 < N) ? f.values[i + N / 2] : 0.0;
        inner += fv - interpolate(f.values, grid, v * c - vs * s);
      }
      acc += f.values[k] * inner * dv;
    }
    part[j] = rule.weight[j] * acc * dv;
  });
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    lhs += part[j];
    rhs += rule.weight[j] * (1.0 - 1.0 / std::cos(rule.theta[j]));
  }
  return {lhs, m1 * m1 * rhs};
}

}  // namespace kinac
