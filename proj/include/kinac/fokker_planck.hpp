#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/collision_direct.hpp"
#include "kinac/parallel.hpp"
#include "kinac/state.hpp"

namespace kinac {

struct FPConfig
{
  double delta = 0.0;
  bool mollified = false;
  // with mollified: add the terms that make the equation the exact small-angle
  // limit of the mollified collision operator (they vanish for psi -> delta)
  bool small_angle_limit = false;
  std::optional<Mollifier> psi;

  void validate() const
  {
    if (!(delta >= 0.0))
      throw std::invalid_argument("delta must be nonnegative");
    if (mollified && !psi)
      throw std::invalid_argument("mollified Fokker-Planck needs a mollifier");
  }
};

struct FPCoefficients
{
  double A = 0.0;  // diffusion
  double B = 0.0;  // drift (mass)
  double C = 0.0;  // extra linear drift C d/dv(v f)
  double E = 0.0;  // antisymmetric flux -E (f g' - f' g)
};

struct FPState
{
  Distribution f;
  double A = 0.0;
  double B = 0.0;
  double t = 0.0;
  bool mollified = false;
};

namespace detail {

inline std::vector<double> fp_nonlinear_partner(const Distribution& f, const FPConfig& cfg)
{
  if (cfg.delta == 0.0)
    return {};
  return cfg.mollified ? mollify(f, *cfg.psi).values : f.values;
}

// face value fbar (1 + delta gbar) at face i + 1/2
inline double face_drift(const std::vector<double>& f, const std::vector<double>& g, double delta,
                         int i)
{
  const double fb = 0.5 * (f[i] + f[i + 1]);
  if (g.empty())
    return fb;
  return fb * (1.0 + delta * 0.5 * (g[i] + g[i + 1]));
}

}  // namespace detail

namespace detail {

// face flux without the diffusion term
inline std::vector<double> fp_transport_flux(const Distribution& f, const std::vector<double>& g,
                                             const FPConfig& cfg, const FPCoefficients& c)
{
  const auto& grid = f.grid;
  const int N = grid.N;
  const double dv = grid.dv();
  const auto& y = f.values;
  std::vector<double> X(N - 1);
  for (int i = 0; i + 1 < N; ++i) {
    const double vf = grid.v(i) + 0.5 * dv;
    double x = c.B * vf * face_drift(y, g, cfg.delta, i);
    if (c.C != 0.0)
      x += c.C * vf * 0.5 * (y[i] + y[i + 1]);
    if (c.E != 0.0) {
      const double fb = 0.5 * (y[i] + y[i + 1]), gb = 0.5 * (g[i] + g[i + 1]);
      x -= c.E * (fb * (g[i + 1] - g[i]) - (y[i + 1] - y[i]) * gb) / dv;
    }
    X[i] = x;
  }
  return X;
}

}  // namespace detail

/// Self-consistent coefficients. B = int f; A approximates int v^2 f(1 + delta g)
/// and is fixed by requiring the discrete energy to be an exact invariant of
/// the flux scheme (sum over faces of v_face * flux = 0).
inline FPCoefficients fp_coefficients(const Distribution& f, const FPConfig& cfg)
{
  const auto& grid = f.grid;
  const int N = grid.N;
  const double dv = grid.dv();
  const auto g = detail::fp_nonlinear_partner(f, cfg);
  FPCoefficients c;
  c.B = mass(f);
  if (!(c.B > 0.0))
    throw std::domain_error("Fokker-Planck coefficients need positive mass");
  if (cfg.mollified && cfg.small_angle_limit && cfg.delta != 0.0) {
    double fg = 0.0, J = 0.0;
    for (int i = 0; i < N; ++i) {
      fg += f.values[i] * g[i];
      const double gl = i > 0 ? g[i - 1] : 0.0, gr = i + 1 < N ? g[i + 1] : 0.0;
      J += grid.v(i) * f.values[i] * (gr - gl) / (2 * dv);
    }
    c.C = cfg.delta * (fg + 2 * J) * dv;
    c.E = cfg.delta * energy(f);
  }
  const auto X = detail::fp_transport_flux(f, g, cfg, c);
  double moment = 0.0, slope = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    const double vf = grid.v(i) + 0.5 * dv;
    moment += vf * X[i];
    slope -= vf * (f.values[i + 1] - f.values[i]);
  }
  c.A = moment * dv / slope;
  return c;
}

/// Flux-form right side B d/dv(v f(1 + delta g)) + A f'' (plus the small-angle
/// terms when enabled) with zero flux at +-L.
inline std::vector<double> fp_rhs(const Distribution& f, const FPConfig& cfg,
                                  const FPCoefficients& c)
{
  const auto& grid = f.grid;
  const int N = grid.N;
  const double dv = grid.dv();
  const auto g = detail::fp_nonlinear_partner(f, cfg);
  const auto X = detail::fp_transport_flux(f, g, cfg, c);
  std::vector<double> flux(N + 1, 0.0);
  for (int i = 0; i + 1 < N; ++i)
    flux[i + 1] = X[i] + c.A * (f.values[i + 1] - f.values[i]) / dv;
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i)
    out[i] = (flux[i + 1] - flux[i]) / dv;
  return out;
}

inline std::vector<double> fp_rhs(const Distribution& f, const FPConfig& cfg)
{
  return fp_rhs(f, cfg, fp_coefficients(f, cfg));
}

inline double fp_steady_residual(const Distribution& f, const FPConfig& cfg)
{
  if (!(mass(f) > 0.0))
    throw std::domain_error("steady residual of an empty distribution");
  const auto r = fp_rhs(f, cfg);
  double s = 0.0;
  for (double x : r)
    s += std::abs(x);
  return s * f.grid.dv();
}

inline double fp_steady_residual(const Distribution& f, double delta)
{
  FPConfig cfg;
  cfg.delta = delta;
  return fp_steady_residual(f, cfg);
}

/// Pseudo-spectral transform of the continuous Fokker-Planck right side:
///   i xi F[B v f(1 + delta g) + C v f - E (f g' - f' g)] - A xi^2 f-hat,
/// continuum coefficients by node quadrature; g = f or f * psi, derivatives
/// taken spectrally.
inline std::vector<cplx> fp_rhs_fourier(const SpectralState& s, const FPConfig& cfg)
{
  cfg.validate();
  const auto& grid = s.grid;
  const int N = grid.N;
  const double dv = grid.dv();
  const bool moll = cfg.mollified && cfg.delta != 0.0;
  std::vector<cplx> G(s.values), dF(N), dG(N);
  for (int j = 0; j < N; ++j) {
    if (moll)
      G[j] *= cfg.psi->fourier[j];
    dF[j] = cplx(0.0, grid.xi(j)) * s.values[j];
    dG[j] = cplx(0.0, grid.xi(j)) * G[j];
  }
  auto real_of = [&](const std::vector<cplx>& H) { return inverse_fourier(SpectralState{grid, H, 0.0}).values; };
  const auto f = real_of(s.values), g = real_of(G), fp = real_of(dF), gp = real_of(dG);

  double m = 0.0, e = 0.0, Ag = 0.0, fg = 0.0, J = 0.0;
  for (int i = 0; i < N; ++i) {
    const double v = grid.v(i);
    m += f[i];
    e += v * v * f[i];
    Ag += v * v * f[i] * g[i];
    fg += f[i] * g[i];
    J += v * f[i] * gp[i];
  }
  m *= dv, e *= dv, Ag *= dv, fg *= dv, J *= dv;
  const double d = cfg.delta;
  const bool extra = moll && cfg.small_angle_limit;
  const double A = e + d * Ag, C = extra ? d * (fg + 2 * J) : 0.0, E = extra ? d * e : 0.0;

  std::vector<double> flux(N);
  for (int i = 0; i < N; ++i) {
    const double v = grid.v(i);
    flux[i] = m * v * f[i] * (1.0 + d * g[i]) + C * v * f[i] - E * (f[i] * gp[i] - fp[i] * g[i]);
  }
  const auto Fl = fourier_values(flux, grid);
  std::vector<cplx> out(N);
  for (int j = 0; j < N; ++j) {
    const double xi = grid.xi(j);
    out[j] = cplx(0.0, xi) * Fl[j] - A * xi * xi * s.values[j];
  }
  hermitize(out);
  return out;
}

struct FPTrajectoryPoint
{
  FPState state;
  double mass = 0.0;
  double energy = 0.0;
  double M4 = 0.0;
  double steady_residual = 0.0;
};

struct FPOptions
{
  int output_stride = 1;
  double positivity_floor = -1e-10;
  bool warn = true;
};

inline double fp_cfl(const Distribution& f, double A)
{
  const double dv = f.grid.dv();
  return dv * dv / (2.0 * A);
}

/// RK4 with the coefficients recomputed from the stage value at every stage.
/// dt = 0 picks 0.9 of the initial CFL bound; a step that violates the bound
/// at the current A is retried with dt halved.
inline std::vector<FPTrajectoryPoint> fp_evolve(const Distribution& f0, const FPConfig& cfg, double T,
                                                double dt = 0.0, const FPOptions& opt = {})
{
  cfg.validate();
  auto c = fp_coefficients(f0, cfg);
  if (dt <= 0.0)
    dt = 0.9 * fp_cfl(f0, c.A);

  auto record = [&](double t, const Distribution& f) {
    FPTrajectoryPoint p;
    const auto cc = fp_coefficients(f, cfg);
    p.state = {f, cc.A, cc.B, t, cfg.mollified};
    p.mass = mass(f);
    p.energy = energy(f);
    p.M4 = fourth_moment(f);
    p.steady_residual = fp_steady_residual(f, cfg);
    return p;
  };

  std::vector<FPTrajectoryPoint> traj{record(0.0, f0)};
  Distribution f = f0;
  double t = 0.0;
  int steps = step_count(T, dt);
  double h = T / steps;
  int n = 0;
  while (n < steps) {
    c = fp_coefficients(f, cfg);
    if (h > fp_cfl(f, c.A) * (1 + 1e-12)) {
      if (opt.warn)
        std::cerr << "warning: Fokker-Planck CFL violated at t = " << t << "; halving dt\n";
      // restart the remaining interval with half the step
      const double rest = T - t;
      h *= 0.5;
      steps = n + step_count(rest, h);
      h = rest / (steps - n);
      continue;
    }
    f.values = rk4_step(f.values, h, [&](const std::vector<double>& y) {
      const Distribution s(f.grid, y);
      return fp_rhs(s, cfg);
    });
    ++n;
    t = (n == steps) ? T : t + h;
    const double mn = *std::min_element(f.values.begin(), f.values.end());
    if (mn < opt.positivity_floor)
      throw SolverAbort("positivity", "Fokker-Planck undershoot " + std::to_string(mn), t);
    if (n % opt.output_stride == 0 || n == steps)
      traj.push_back(record(t, f));
  }
  return traj;
}

/// delta = 0 moment oracle: M4(t) = 3e^2/m + (M4(0) - 3e^2/m) exp(-4 m t).
inline double fp_fourth_moment_exact(double m, double e, double M4_0, double t)
{
  const double inf = 3.0 * e * e / m;
  return inf + (M4_0 - inf) * std::exp(-4.0 * m * t);
}

}  // namespace kinac
