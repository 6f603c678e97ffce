#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/cross_section.hpp"
#include "kinac/fokker_planck.hpp"
#include "kinac/parallel.hpp"
#include "kinac/spectral.hpp"
#include "kinac/state.hpp"

namespace kinac {

struct GrazingConfig
{
  double delta = 0.0;
  std::optional<Mollifier> psi;
  double theta_split = 0.0;  // 0: the inner boundary eps^{1/(1-mu)}
  int outer_nodes = 32;
  int oversample = 16;
};

// The smallest admissible split: beyond it the kernel is mild and quadrature
// is accurate, while the Taylor remainder grows like theta_split^2 xi^2.
inline double default_theta_split(const CrossSection& cs)
{
  return std::min(cs.inner_boundary(), 0.5 * cs.edge());
}

namespace detail {

inline void require_normalized(const CrossSection& cs)
{
  if (cs.kind != KernelKind::GrazingFamily)
    throw std::invalid_argument("grazing operator needs a grazing-family kernel");
  if (cs.cutoff)
    throw std::invalid_argument("grazing operator needs the untruncated family");
  const double t2 = grazing_theta2_within(cs, cs.edge());
  if (std::abs(t2 - 2.0) > 1e-10)
    throw std::invalid_argument("grazing family is not normalized (theta^2 moment " +
                                std::to_string(t2) + ")");
}

inline SpectralRhsConfig spectral_config(const GrazingConfig& g)
{
  SpectralRhsConfig c;
  c.delta = g.delta;
  if (g.psi)
    c.psi_hat = g.psi->fourier;
  c.theta_nodes = g.outer_nodes;
  c.oversample = g.oversample;
  return c;
}

}  // namespace detail

/// Coefficient of theta^2 in the small-angle expansion of the Fourier-side
/// collision integrand (odd powers dropped), on the frequency grid:
///   c2 = (-m xi F'(xi) - e xi^2 F(xi)) / 2
///      + delta/(2 pi) int P(eta) [ (-m xi F'(xi-eta) - e F(xi-eta)((xi-eta)^2 - eta^2)) / 2
///                                  + xi^2 F(xi) F''(-eta) / 2 - xi F(-eta) F'(xi) / 2
///                                  + xi eta F'(xi) F'(-eta) ] d eta
/// with P = F psi-hat, m = F(0), e = -F''(0); F', F'' are transforms of
/// (-iv) f and (-iv)^2 f.
inline std::vector<cplx> theta2_coefficient(const SpectralState& s, double delta,
                                            const std::vector<double>& psi_hat = {})
{
  const auto& grid = s.grid;
  const int N = grid.N, h = N / 2;
  const double dxi = grid.dxi();
  const auto& F = s.values;
  const auto f = inverse_fourier_complex(s);
  std::vector<cplx> d1(N), d2(N);
  for (int i = 0; i < N; ++i) {
    const double v = grid.v(i);
    d1[i] = cplx(0.0, -v) * f[i];
    d2[i] = -v * v * f[i];
  }
  const auto F1 = fourier_values(d1, grid);
  const auto F2 = fourier_values(d2, grid);
  const double m = F[h].real();
  const double e = -F2[h].real();
  auto on = [&](const std::vector<cplx>& G, int k) { return (k >= -h && k < h) ? G[k + h] : cplx(0.0); };

  std::vector<cplx> P(N);
  for (int j = 0; j < N; ++j)
    P[j] = psi_hat.empty() ? F[j] : F[j] * psi_hat[j];

  std::vector<cplx> out(N, 0.0);
  const double cubic = delta / (2.0 * std::numbers::pi) * dxi;
  parallel_for(h + 1, [&](std::size_t kk) {
    const int k = -static_cast<int>(kk);
    const double xi = k * dxi;
    const cplx Fx = on(F, k), F1x = on(F1, k);
    cplx c = 0.5 * (-m * xi * F1x - e * xi * xi * Fx);
    if (delta != 0.0) {
      cplx acc = 0.0;
      for (int mi = -h; mi < h; ++mi) {
        const cplx Pm = P[mi + h];
        if (Pm == 0.0)
          continue;
        const double eta = mi * dxi;
        const double u = xi - eta;
        const cplx second =
            0.5 * (-m * xi * on(F1, k - mi) - e * on(F, k - mi) * (u * u - eta * eta));
        const cplx third = 0.5 * xi * xi * Fx * on(F2, -mi) - 0.5 * xi * on(F, -mi) * F1x +
                           xi * eta * F1x * on(F1, -mi);
        acc += (second + third) * Pm;
      }
      c += cubic * acc;
    }
    out[k + h] = c;
  });
  for (int k = 1; k < h; ++k)
    out[k + h] = std::conj(out[h - k]);
  out[0] = cplx(out[0].real(), 0.0);
  out[h] = cplx(out[h].real(), 0.0);
  return out;
}

/// Fourier-side operator for the untruncated grazing family: quadrature over
/// theta_split < |theta| < edge, second-order Taylor polynomial with the
/// analytic theta^2 weight inside.
inline std::vector<cplx> rhs_grazing(const SpectralState& s, const CrossSection& cs,
                                     const GrazingConfig& cfg)
{
  detail::require_normalized(cs);
  const double split = cfg.theta_split > 0.0 ? cfg.theta_split : default_theta_split(cs);
  if (split < cs.inner_boundary())
    throw std::invalid_argument("theta_split lies inside the inner grazing piece");
  const auto rule = angular_rule(cs, cfg.outer_nodes, split);
  const auto scfg = detail::spectral_config(cfg);
  auto out = detail::spectral_rhs_nodes(s.values, s.grid, rule, scfg);
  const double W = grazing_theta2_within(cs, split);
  const auto c2 = theta2_coefficient(s, cfg.delta, scfg.psi_hat);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] += W * c2[j];
  return out;
}

/// Reference evaluation without the Taylor step: quadrature of the untruncated
/// family over lo < |theta| < edge with exact transform values. The neglected
/// core contributes c2 W(lo) + O(lo^{3-mu}) with W(lo) ~ lo^{1-mu}; this is
/// removed by extrapolation from lo and lo/4 (no small-angle expansion used).
/// lo trades that remainder against round-off, which grows like lo^{-3/2}.
inline std::vector<cplx> rhs_grazing_brute_force(const SpectralState& s, const CrossSection& cs,
                                                 const GrazingConfig& cfg, int nodes = 256,
                                                 double lo = 1e-4)
{
  detail::require_normalized(cs);
  lo = std::min(lo, cs.inner_boundary());
  const ExactTransform I(s);
  const auto scfg = detail::spectral_config(cfg);
  auto at = [&](double a) {
    return detail::spectral_rhs_eval(s.values, s.grid, angular_rule(cs, nodes, a), scfg, I);
  };
  const auto a = at(lo), b = at(lo / 4);
  const double r = std::pow(0.25, 1.0 - cs.mu);
  std::vector<cplx> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    out[j] = (b[j] - r * a[j]) / (1.0 - r);
  return out;
}

/// Fourier transform of the limiting Fokker-Planck right side (full-range
/// theta^2 moment 2, i.e. twice the theta^2 coefficient in the limit). With a
/// mollifier this is the exact small-angle limit, not the tilde-only form.
inline std::vector<cplx> fp_limit_rhs(const SpectralState& s, const GrazingConfig& cfg)
{
  FPConfig f;
  f.delta = cfg.delta;
  f.mollified = cfg.psi.has_value();
  f.small_angle_limit = true;
  f.psi = cfg.psi;
  return fp_rhs_fourier(s, f);
}

struct TaylorCheck
{
  double first_order = 0.0;
  double second_order_mismatch = 0.0;
};

/// first_order: symmetric-quadrature sum of the theta-odd part of the
/// integrand over small angles; second_order_mismatch: sup |2 c2 - FP-hat|.
inline TaylorCheck taylor_structure_check(const SpectralState& s, double delta,
                                          const std::optional<Mollifier>& psi,
                                          double theta_max = 0.05, int nodes = 8)
{
  GrazingConfig cfg;
  cfg.delta = delta;
  cfg.psi = psi;
  const auto scfg = detail::spectral_config(cfg);
  const auto half = gauss_legendre(nodes, 0.0, theta_max);
  AngularRule plus, minus;
  const auto full = mirror_rule(half);
  plus.theta = full.nodes;
  plus.weight = full.weights;
  minus.theta = full.nodes;
  for (auto& t : minus.theta)
    t = -t;
  minus.weight = full.weights;
  const auto a = detail::spectral_rhs_nodes(s.values, s.grid, plus, scfg);
  const auto b = detail::spectral_rhs_nodes(s.values, s.grid, minus, scfg);
  TaylorCheck r;
  for (std::size_t j = 0; j < a.size(); ++j)
    r.first_order = std::max(r.first_order, 0.5 * std::abs(a[j] - b[j]));

  const auto c2 = theta2_coefficient(s, delta, scfg.psi_hat);
  const auto fp = fp_limit_rhs(s, cfg);
  for (std::size_t j = 0; j < c2.size(); ++j)
    r.second_order_mismatch = std::max(r.second_order_mismatch, std::abs(2.0 * c2[j] - fp[j]));
  return r;
}

/// Step from the RK4 real-axis stability limit 2.78 (with margin): the annulus
/// contributes at most 2 m int beta (1 + 2 delta m ||psi||) (gain plus loss),
/// the Taylor core acts like W/2 times a Fokker-Planck operator with diffusion
/// ~ e (1 + delta m ||psi||) xi_max^2 and drift ~ m (1 + delta m ||psi||) L xi_max.
inline double grazing_dt_bound(const SpectralState& s, const CrossSection& cs,
                               const GrazingConfig& cfg, double psi_sup)
{
  const double split = cfg.theta_split > 0.0 ? cfg.theta_split : default_theta_split(cs);
  const double m = std::abs(s.values[s.grid.N / 2]);
  const double outer = angular_rule(cs, cfg.outer_nodes, split).total();
  const double W = grazing_theta2_within(cs, split);
  const double xmax = s.grid.N / 2 * s.grid.dxi();
  const double e = energy(inverse_fourier(s));
  const double q = 1.0 + cfg.delta * m * psi_sup;
  const double lambda = 2.0 * m * outer * (1.0 + 2.0 * cfg.delta * m * psi_sup) +
                        0.5 * W * q * (e * xmax * xmax + m * s.grid.L * xmax);
  return 2.5 / lambda;
}

enum class FPReference { FiniteVolume, Spectral };

struct GrazingSweep
{
  double mu = 0.5;
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  double theta_split = 0.0;  // 0: per-eps default
  double T = 0.5;
  std::vector<double> comparison_times;  // empty: T/4, T/2, 3T/4, T
  int outer_nodes = 32;
  FPReference reference = FPReference::Spectral;
  // filled by run_sweep
  std::vector<double> errors;
  std::vector<double> sup_L14;
  std::vector<double> wall_time;
  std::vector<double> dt;
  std::vector<double> operator_errors;  // sup |rhs_grazing - FP-hat| at t = 0

  void validate() const
  {
    if (eps_list.empty())
      throw std::invalid_argument("empty eps list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
      if (!(eps_list[i] < eps_list[i - 1]))
        throw std::invalid_argument("eps list must be strictly decreasing");
    for (double e : eps_list) {
      const auto cs = CrossSection::grazing(e, mu);
      if (theta_split > 0.0 && theta_split < cs.inner_boundary())
        throw std::invalid_argument("theta_split inside the inner piece for eps = " +
                                    std::to_string(e));
    }
    if (!(T > 0.0))
      throw std::invalid_argument("sweep horizon must be positive");
  }

  std::vector<double> times() const
  {
    if (!comparison_times.empty())
      return comparison_times;
    return {T / 4, T / 2, 3 * T / 4, T};
  }
};

struct SweepAbort : std::runtime_error
{
  double eps;
  std::string invariant;
  SweepAbort(double e, const SolverAbort& a)
      : std::runtime_error("eps = " + std::to_string(e) + ": " + a.what()), eps(e),
        invariant(a.invariant)
  {
  }
};

/// Fokker-Planck reference transforms at the comparison times.
inline std::vector<SpectralState> fp_reference(const Distribution& f0, double delta,
                                               const std::optional<Mollifier>& psi,
                                               const std::vector<double>& times, FPReference kind,
                                               double dt)
{
  std::vector<SpectralState> out;
  if (kind == FPReference::FiniteVolume) {
    FPConfig c;
    c.delta = delta;
    c.mollified = psi.has_value();
    c.small_angle_limit = true;
    c.psi = psi;
    FPOptions o;
    o.output_stride = 1 << 30;
    Distribution f = f0;
    double t = 0.0;
    for (double tc : times) {
      f = fp_evolve(f, c, tc - t, 0.0, o).back().state.f;
      t = tc;
      out.push_back(fourier(f));
    }
    return out;
  }
  GrazingConfig g;
  g.delta = delta;
  g.psi = psi;
  SpectralState s = fourier(f0);
  double t = 0.0;
  SpectralEvolveOptions o;
  o.output_stride = 1 << 30;
  for (double tc : times) {
    s = evolve_with(s, tc - t, dt, [&](const SpectralState& x) { return fp_limit_rhs(x, g); }, o)
            .back();
    t = tc;
    s.t = t;
    out.push_back(s);
  }
  return out;
}

/// observe(i, state) sees every step of the run for eps_list[i] (state.t absolute).
inline GrazingSweep run_sweep(
    const Distribution& f0, double delta, const std::optional<Mollifier>& psi, GrazingSweep sweep,
    const std::function<void(std::size_t, const SpectralState&)>& observe = {})
{
  sweep.validate();
  const auto times = sweep.times();
  const SpectralState s0 = fourier(f0);
  const double psi_sup = psi ? psi->sup_norm : 0.0;

  GrazingConfig base;
  base.delta = delta;
  base.psi = psi;
  base.outer_nodes = sweep.outer_nodes;

  std::vector<CrossSection> kernels;
  std::vector<double> steps;
  const double t_first = times.front();
  for (double e : sweep.eps_list) {
    kernels.push_back(grazing_normalize(sweep.mu, e));
    GrazingConfig g = base;
    g.theta_split = sweep.theta_split;
    const double dt = grazing_dt_bound(s0, kernels.back(), g, psi_sup);
    // land on every comparison time
    steps.push_back(t_first / step_count(t_first, dt));
  }
  const double dt = *std::min_element(steps.begin(), steps.end());

  const auto ref = fp_reference(f0, delta, psi, times, sweep.reference, dt);
  const auto ref0 = fp_limit_rhs(s0, base);

  sweep.errors.clear();
  sweep.sup_L14.clear();
  sweep.wall_time.clear();
  sweep.dt.clear();
  sweep.operator_errors.clear();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    GrazingConfig g = base;
    g.theta_split = sweep.theta_split;
    const auto& cs = kernels[i];
    const auto r0 = rhs_grazing(s0, cs, g);
    double op = 0.0;
    for (std::size_t j = 0; j < r0.size(); ++j)
      op = std::max(op, std::abs(r0[j] - ref0[j]));
    sweep.operator_errors.push_back(op);

    SpectralState s = s0;
    double t = 0.0, err = 0.0, l14 = moment_p(f0, 4.0);
    SpectralEvolveOptions o;
    if (observe)
      observe(i, s0);
    try {
      for (std::size_t c = 0; c < times.size(); ++c) {
        auto traj = evolve_with(s, times[c] - t, steps[i],
                                [&](const SpectralState& x) { return rhs_grazing(x, cs, g); }, o);
        for (std::size_t k = 1; k < traj.size(); ++k) {
          l14 = std::max(l14, moment_p(inverse_fourier(traj[k]), 4.0));
          if (observe) {
            SpectralState p = traj[k];
            p.t += t;
            observe(i, p);
          }
        }
        s = traj.back();
        t = times[c];
        s.t = t;
        err = std::max(err, spectral_sup_distance(s, ref[c]));
      }
    } catch (const SolverAbort& a) {
      throw SweepAbort(sweep.eps_list[i], a);
    }
    sweep.errors.push_back(err);
    sweep.sup_L14.push_back(l14);
    sweep.dt.push_back(steps[i]);
    sweep.wall_time.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return sweep;
}

}  // namespace kinac
