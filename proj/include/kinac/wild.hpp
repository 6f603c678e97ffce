#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/collision_direct.hpp"
#include "kinac/cross_section.hpp"
#include "kinac/parallel.hpp"
#include "kinac/state.hpp"

namespace kinac {

/// Taylor coefficients of (1 - x)^{-1/2}: b_{k+1} = b_k (2k + 1) / (2k + 2).
inline std::vector<double> wild_coefficients(int k_max)
{
  if (k_max < 0)
    throw std::invalid_argument("k_max must be nonnegative");
  std::vector<double> b(k_max + 1);
  b[0] = 1.0;
  for (int k = 0; k < k_max; ++k)
    b[k + 1] = b[k] * (2.0 * k + 1.0) / (2.0 * k + 2.0);
  return b;
}

/// e^{-tau} sum_{k > k_max} b_k x^k with x = 1 - e^{-2 tau}: the weight of the
/// truncated part of the series (every iterate has the same mass).
inline double wild_tail(int k_max, double tau)
{
  const auto b = wild_coefficients(k_max);
  const long double x = -std::expm1(-2.0L * tau);
  long double s = 0.0L, p = 1.0L;
  for (int k = 0; k <= k_max; ++k) {
    s += b[k] * p;
    p *= x;
  }
  return static_cast<double>(1.0L - std::exp(-static_cast<long double>(tau)) * s);
}

/// Largest tau with wild_tail(k_max, tau) < tol (bisection; tail increases with tau).
inline double wild_horizon(int k_max, double tol = 1e-8)
{
  double lo = 0.0, hi = 1.0;
  while (wild_tail(k_max, hi) < tol && hi < 1e3)
    hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (wild_tail(k_max, mid) < tol ? lo : hi) = mid;
  }
  return lo;
}

struct WildSetup
{
  AngularRule rule;
  double delta = 0.0;
  Mollifier psi;
  double m0 = 1.0;
  Deposit deposit = Deposit::Cubic;

  double beta_total() const { return rule.total(); }
  /// K = m0 (1 + 2 delta ||psi|| m0) int beta.
  double K() const { return m0 * (1.0 + 2.0 * delta * psi.sup_norm * m0) * beta_total(); }
  /// C_P = int beta (2/m0 + 4 delta ||psi||).
  double C_P() const { return beta_total() * (2.0 / m0 + 4.0 * delta * psi.sup_norm); }
};

/// Trilinear gain-dominant operator
///   P(f,g,h) = int beta [f'g*' X - f g* X'] + f (int g) (int h / m0 + 2 delta ||psi|| int h) int beta,
/// X = int h / m0 + delta h~ + delta h~*, with the collision-pair discretization
/// of the direct operator.
inline std::vector<double> p_trilinear(const Distribution& f, const Distribution& g,
                                       const Distribution& hdist, const WildSetup& w)
{
  const auto& grid = f.grid;
  const int N = grid.N, half = N / 2;
  const double dv = grid.dv();
  const double mh = mass(hdist), mg = mass(g);
  const double ch = mh / w.m0;
  const auto ht = mollify(hdist, w.psi).values;
  const double* H = ht.data();
  const double* fv = f.values.data();
  const double* gv = g.values.data();
  std::vector<char> active(N);
  for (int i = 0; i < N; ++i)
    active[i] = fv[i] != 0.0 || gv[i] != 0.0;
  std::vector<std::vector<double>> part(w.rule.size(), std::vector<double>(N, 0.0));
  parallel_for(w.rule.size(), [&](std::size_t j) {
    collide_node(w.deposit, grid, w.rule.theta[j], active, part[j],
                 [&](int a, int b, double up, double usp) {
                   const double hp = detail::lerp_value(H, detail::lerp_at(up, half));
                   const double hs = detail::lerp_value(H, detail::lerp_at(usp, half));
                   return fv[a] * gv[b] * (ch + w.delta * (hp + hs));
                 });
  });
  std::vector<double> P(N, 0.0);
  for (std::size_t j = 0; j < w.rule.size(); ++j)
    for (int i = 0; i < N; ++i)
      P[i] += w.rule.weight[j] * dv * part[j][i];
  const double comp = mg * (ch + 2.0 * w.delta * w.psi.sup_norm * mh) * w.beta_total();
  for (int i = 0; i < N; ++i)
    P[i] += fv[i] * comp;
  return P;
}

struct WildExpansion
{
  int k_max = 0;
  std::vector<double> b;
  std::vector<Distribution> iterates;
  double K = 0.0;
  double C_P = 0.0;
  double horizon = 0.0;  // largest rescaled time tau with tail < 1e-8
};

/// Iterates f_k of the series, k = 0..k_max, from the recursion
///   f_{k} = sum_{i1+i2+i3=k-1} b_{i1} b_{i2} b_{i3} / (2k b_k) P(f_{i1}, f_{i2}, f_{i3}) / K.
/// Trilinearity lets one level be assembled from the pair products
/// sum_{i1+i2=t} B_{i1}(a) B_{i2}(b), B_i = b_i f_i, in a single sweep over
/// the collision pairs.
inline WildExpansion wild_expand(const Distribution& f0, const WildSetup& w, int k_max)
{
  const auto& grid = f0.grid;
  const int N = grid.N, half = N / 2;
  const double dv = grid.dv();
  WildExpansion ex;
  ex.k_max = k_max;
  ex.b = wild_coefficients(k_max);
  ex.K = w.K();
  ex.C_P = w.C_P();
  ex.horizon = wild_horizon(k_max);
  ex.iterates.push_back(f0);
  if (k_max == 0)
    return ex;

  const int L = k_max;  // levels S = 0..k_max-1
  const double sup = w.psi.sup_norm;
  std::vector<std::vector<double>> B;      // B_i = b_i f_i
  std::vector<double> mB, cB;               // mass(B_i), mass(B_i)/m0
  std::vector<double> Hint(static_cast<std::size_t>(N) * L, 0.0);  // [node][i]
  std::vector<double> PP(static_cast<std::size_t>(N) * N * L, 0.0); // [(a,b)][t]
  std::vector<char> active(N, 0);

  auto add_iterate = [&](const Distribution& fk, int k) {
    std::vector<double> Bk(N);
    for (int i = 0; i < N; ++i)
      Bk[i] = ex.b[k] * fk.values[i];
    const auto Hk = mollify(Distribution(grid, Bk), w.psi).values;
    double m = 0.0;
    for (double x : Bk)
      m += x;
    m *= dv;
    B.push_back(Bk);
    mB.push_back(m);
    cB.push_back(m / w.m0);
    if (k < L)
      for (int i = 0; i < N; ++i)
        Hint[static_cast<std::size_t>(i) * L + k] = Hk[i];
    for (int i = 0; i < N; ++i)
      active[i] = active[i] || Bk[i] != 0.0;
  };
  add_iterate(f0, 0);

  for (int S = 0; S < L; ++S) {
    // pair products for t = S
    for (int a = 0; a < N; ++a)
      for (int bb = 0; bb < N; ++bb) {
        double s = 0.0;
        for (int i1 = 0; i1 <= S; ++i1)
          s += B[i1][a] * B[S - i1][bb];
        PP[(static_cast<std::size_t>(a) * N + bb) * L + S] = s;
      }

    std::vector<std::vector<double>> part(w.rule.size(), std::vector<double>(N, 0.0));
    parallel_for(w.rule.size(), [&](std::size_t j) {
      collide_node(w.deposit, grid, w.rule.theta[j], active, part[j],
                   [&](int a, int bb, double up, double usp) {
                     const double* pp = &PP[(static_cast<std::size_t>(a) * N + bb) * L];
                     const auto lp = detail::lerp_at(up, half);
                     const auto ls = detail::lerp_at(usp, half);
                     const double* h0 = &Hint[static_cast<std::size_t>(lp.i) * L];
                     const double* h1 = h0 + L;
                     const double* s0 = &Hint[static_cast<std::size_t>(ls.i) * L];
                     const double* s1 = s0 + L;
                     double r = 0.0;
                     for (int c = 0; c <= S; ++c) {
                       const double hc = (1.0 - lp.w) * h0[c] + lp.w * h1[c] +
                                         (1.0 - ls.w) * s0[c] + ls.w * s1[c];
                       r += (cB[c] + w.delta * hc) * pp[S - c];
                     }
                     return r;
                   });
    });
    std::vector<double> Psum(N, 0.0);
    for (std::size_t j = 0; j < w.rule.size(); ++j)
      for (int i = 0; i < N; ++i)
        Psum[i] += w.rule.weight[j] * dv * part[j][i];
    // compensating term: sum_{i1+i2+i3=S} B_{i1} m(B_{i2}) (c_{i3} + 2 delta ||psi|| m(B_{i3})) int beta
    for (int i1 = 0; i1 <= S; ++i1) {
      double st = 0.0;
      for (int i2 = 0; i2 <= S - i1; ++i2) {
        const int i3 = S - i1 - i2;
        st += mB[i2] * (cB[i3] + 2.0 * w.delta * sup * mB[i3]);
      }
      st *= w.beta_total();
      for (int i = 0; i < N; ++i)
        Psum[i] += B[i1][i] * st;
    }
    const int k = S + 1;
    const double scale = 1.0 / (ex.K * 2.0 * k * ex.b[k]);
    Distribution fk(grid);
    for (int i = 0; i < N; ++i)
      fk.values[i] = Psum[i] * scale;
    ex.iterates.push_back(fk);
    add_iterate(fk, k);
  }
  return ex;
}

/// Series value at rescaled time tau = K t. The truncated remainder, whose
/// weight wild_tail(k_max, tau) is known exactly, is closed with the last
/// iterate so that mass and energy are carried exactly.
inline Distribution wild_evaluate(const WildExpansion& ex, double tau)
{
  const auto& grid = ex.iterates[0].grid;
  Distribution u(grid);
  const double x = -std::expm1(-2.0 * tau);
  const double e = std::exp(-tau);
  double p = 1.0;
  for (int k = 0; k <= ex.k_max; ++k) {
    const double c = ex.b[k] * e * p;
    for (int i = 0; i < grid.N; ++i)
      u.values[i] += c * ex.iterates[k].values[i];
    p *= x;
  }
  const double tail = wild_tail(ex.k_max, tau);
  for (int i = 0; i < grid.N; ++i)
    u.values[i] += tail * ex.iterates[ex.k_max].values[i];
  return u;
}

inline WildSetup make_wild_setup(const Distribution& f0, const CrossSection& cs, int theta_nodes,
                                 double delta, const Mollifier& psi,
                                 Deposit deposit = Deposit::Cubic)
{
  if (!cs.integrable())
    throw std::domain_error("Wild expansion needs a cutoff kernel");
  WildSetup w{angular_rule(cs, theta_nodes), delta, psi, mass(f0), deposit};
  return w;
}

inline Distribution wild_solve(const Distribution& f0, const WildSetup& w, int k_max, double t,
                               double tail_tolerance = 1e-8)
{
  const double tau = w.K() * t;
  if (tau > 0.0 && wild_tail(k_max, tau) >= tail_tolerance)
    throw std::domain_error("Wild series horizon exceeded (tail " +
                            std::to_string(wild_tail(k_max, tau)) +
                            "); use time marching with a smaller step");
  if (t == 0.0)
    return f0;
  return wild_evaluate(wild_expand(f0, w, k_max), tau);
}

struct WildPoint
{
  double t = 0.0;
  Distribution f;
};

/// Repeated re-expansion over steps of length at most dt_series (0: the
/// largest step allowed by the truncation tail). Every step re-expands
/// around the previous output, with m0 reset to its mass.
inline std::vector<WildPoint> wild_march(const Distribution& f0, const WildSetup& w, int k_max,
                                         double T, double dt_series = 0.0, int output_stride = 1)
{
  const double tau_max = wild_horizon(k_max);
  // slack so that re-anchoring m0 to round-off mass changes stays inside the horizon
  const double dt_max = tau_max / w.K() * (1 - 1e-9);
  if (dt_series <= 0.0)
    dt_series = dt_max;
  if (dt_series > dt_max * (1 + 1e-12))
    throw std::domain_error("Wild series step exceeds the truncation horizon");
  const int steps = step_count(T, dt_series);
  const double h = T / steps;
  std::vector<WildPoint> traj{{0.0, f0}};
  Distribution f = f0;
  WildSetup ws = w;
  for (int n = 1; n <= steps; ++n) {
    // m0 = m is an unstable fixed point of the mass balance of the fixed-m0
    // series (dm/dt = K (m^2/m0 - m)); re-anchor so round-off cannot grow
    ws.m0 = mass(f);
    f = wild_solve(f, ws, k_max, h);
    if (n % output_stride == 0 || n == steps)
      traj.push_back({n * h, f});
  }
  return traj;
}

}  // namespace kinac
