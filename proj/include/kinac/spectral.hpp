#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/collision_direct.hpp"
#include "kinac/cross_section.hpp"
#include "kinac/parallel.hpp"
#include "kinac/state.hpp"

namespace kinac {

/// Evaluates F(x) = dv sum_i f_i exp(-i v_i x) at arbitrary real x: the
/// transform is tabulated on a frequency grid `oversample` times finer than
/// the base grid (zero padding in v) and interpolated by cubic Lagrange
/// polynomials; zero beyond the band |x| < pi N / (2L).
class SpectralInterpolant
{
public:
  SpectralInterpolant(const std::vector<cplx>& F, const VelocityGrid& g, int oversample = 16)
      : SpectralInterpolant(inverse_fourier_complex(SpectralState{g, F, 0.0}), F, g, oversample)
  {
  }

  /// Interpolant of the transform of complex velocity samples.
  static SpectralInterpolant from_samples(const std::vector<cplx>& f, const VelocityGrid& g,
                                          int oversample = 16)
  {
    return SpectralInterpolant(f, fourier_values(f, g), g, oversample);
  }

  cplx operator()(double x) const
  {
    if (!(std::abs(x) < band_))
      return 0.0;
    const int M = p_ * N_;
    const double u = x * inv_step_ + M / 2;
    const double fl = std::floor(u);
    const int i = static_cast<int>(fl);
    const double t = u - fl;
    if (t == 0.0)
      return i < M ? table_[i] : cplx(0.0);
    // cubic Lagrange through nodes i-1, i, i+1, i+2
    const double wm = -t * (t - 1) * (t - 2) / 6;
    const double w0 = (t + 1) * (t - 1) * (t - 2) / 2;
    const double w1 = -(t + 1) * t * (t - 2) / 2;
    const double w2 = (t + 1) * t * (t - 1) / 6;
    return wm * at(i - 1) + w0 * at(i) + w1 * at(i + 1) + w2 * at(i + 2);
  }

private:
  SpectralInterpolant(const std::vector<cplx>& f, const std::vector<cplx>& F,
                      const VelocityGrid& g, int oversample)
      : p_(oversample), N_(g.N), band_(std::numbers::pi * g.N / (2.0 * g.L))
  {
    const int M = p_ * N_;
    const VelocityGrid fine(p_ * g.L, M);
    std::vector<cplx> padded(M, 0.0);
    const int off = (p_ - 1) * N_ / 2;
    for (int i = 0; i < N_; ++i)
      padded[i + off] = f[i];
    table_ = fourier_values(padded, fine);
    // exact base-grid values (identical up to round-off)
    for (int k = -N_ / 2; k < N_ / 2; ++k)
      table_[p_ * k + M / 2] = F[k + N_ / 2];
    inv_step_ = p_ * g.L / std::numbers::pi;
  }

  cplx at(int i) const { return (i >= 0 && i < static_cast<int>(table_.size())) ? table_[i] : 0.0; }

  int p_;
  int N_;
  double band_;
  double inv_step_ = 1.0;
  std::vector<cplx> table_;
};

/// Exact trigonometric sum F(x) = dv sum_i f_i exp(-i v_i x), O(N) per value,
/// with the same band limit as SpectralInterpolant (the sum itself is periodic).
class ExactTransform
{
public:
  ExactTransform(const SpectralState& s)
      : grid_(s.grid), f_(inverse_fourier_complex(s)), band_(std::numbers::pi * s.grid.N / (2.0 * s.grid.L))
  {
  }

  cplx operator()(double x) const
  {
    if (!(std::abs(x) < band_))
      return 0.0;
    const cplx step = std::polar(1.0, -grid_.dv() * x);
    cplx w = std::polar(1.0, grid_.L * x);  // exp(-i v_0 x)
    cplx acc = 0.0;
    for (const auto& fi : f_) {
      acc += fi * w;
      w *= step;
    }
    return acc * grid_.dv();
  }

private:
  VelocityGrid grid_;
  std::vector<cplx> f_;
  double band_;
};

struct SpectralRhsConfig
{
  double delta = 0.0;
  std::vector<double> psi_hat;  // on the frequency grid; empty means psi-hat = 1
  int theta_nodes = 32;
  int oversample = 16;
  // eta nodes with |f-hat psi-hat| below skip_threshold * mass are skipped
  double skip_threshold = 1e-18;
};

namespace detail {

/// Frequencies eta_m kept in the eta-integrals, with P_m = F(eta_m) psi-hat(eta_m).
struct EtaSet
{
  std::vector<int> index;
  std::vector<cplx> P;
};

inline EtaSet eta_set(const std::vector<cplx>& F, const SpectralRhsConfig& cfg)
{
  EtaSet e;
  const double m = std::abs(F[F.size() / 2]);
  for (std::size_t j = 0; j < F.size(); ++j) {
    const cplx P = cfg.psi_hat.empty() ? F[j] : F[j] * cfg.psi_hat[j];
    if (std::abs(P) > cfg.skip_threshold * m) {
      e.index.push_back(static_cast<int>(j));
      e.P.push_back(P);
    }
  }
  return e;
}

/// Right-hand side restricted to a set of angular nodes, with off-grid
/// transform values from the evaluator I.
template <typename Eval>
std::vector<cplx> spectral_rhs_eval(const std::vector<cplx>& F, const VelocityGrid& grid,
                                    const AngularRule& rule, const SpectralRhsConfig& cfg,
                                    const Eval& I)
{
  const int N = grid.N, h = N / 2;
  const double dxi = grid.dxi();
  const auto eta = eta_set(F, cfg);
  const std::size_t ne = eta.index.size();
  const double cubic = cfg.delta / (2.0 * std::numbers::pi) * dxi;
  const std::size_t nt = rule.size();

  // angle-dependent tables independent of xi
  std::vector<double> cj(nt), sj(nt);
  std::vector<std::vector<cplx>> T(nt), A(nt), B(nt);
  parallel_for(nt, [&](std::size_t j) {
    cj[j] = std::cos(rule.theta[j]);
    sj[j] = std::sin(rule.theta[j]);
    if (cfg.delta == 0.0)
      return;
    T[j].resize(2 * N + 1);
    for (int q = -N; q <= N; ++q)
      T[j][q + N] = I(q * dxi * cj[j]) * I(q * dxi * sj[j]);
    A[j].resize(ne);
    B[j].resize(ne);
    for (std::size_t m = 0; m < ne; ++m) {
      const double e = (eta.index[m] - h) * dxi;
      A[j][m] = I(e * sj[j]);
      B[j][m] = I(-e * cj[j]);
    }
  });

  const cplx F0 = F[h];
  std::vector<cplx> out(N, 0.0);
  parallel_for(h + 1, [&](std::size_t kk) {
    const int k = -static_cast<int>(kk);  // k = 0, -1, ..., -N/2
    const double xi = k * dxi;
    const cplx Fk = F[k + h];
    cplx t1 = 0.0, tq = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      const double c = cj[j], s = sj[j];
      cplx a1 = I(xi * c) * I(xi * s) - Fk * F0;
      cplx aq = 0.0;
      if (cfg.delta != 0.0) {
        for (std::size_t m = 0; m < ne; ++m) {
          const int mi = eta.index[m] - h;
          const double e = mi * dxi;
          const cplx second = T[j][k - mi + N] - I(xi - e * c) * A[j][m];
          const cplx third = I(xi * c - e * s) * I(-xi * s - e * c) - I(xi - e * s) * B[j][m];
          aq += (second + third) * eta.P[m];
        }
      }
      t1 += rule.weight[j] * a1;
      tq += rule.weight[j] * aq;
    }
    out[k + h] = t1 + cubic * tq;
  });
  for (int k = 1; k < h; ++k)
    out[k + h] = std::conj(out[h - k]);
  out[0] = cplx(out[0].real(), 0.0);
  out[h] = cplx(out[h].real(), 0.0);
  return out;
}

inline std::vector<cplx> spectral_rhs_nodes(const std::vector<cplx>& F, const VelocityGrid& grid,
                                            const AngularRule& rule,
                                            const SpectralRhsConfig& cfg)
{
  return spectral_rhs_eval(F, grid, rule, cfg, SpectralInterpolant(F, grid, cfg.oversample));
}

}  // namespace detail

/// Fourier-space right-hand side of the mollified equation for a cutoff kernel.
inline std::vector<cplx> spectral_rhs(const SpectralState& state, const AngularRule& rule,
                                      const SpectralRhsConfig& cfg)
{
  return detail::spectral_rhs_nodes(state.values, state.grid, rule, cfg);
}

inline std::vector<cplx> spectral_rhs(const SpectralState& state, const CrossSection& cs,
                                      const SpectralRhsConfig& cfg)
{
  if (!cs.integrable())
    throw std::domain_error("spectral rhs needs a cutoff kernel; use the grazing operator");
  return spectral_rhs(state, angular_rule(cs, cfg.theta_nodes), cfg);
}

/// -(F(xi_1) - 2 F(0) + F(-xi_1)) / xi_1^2 (real part).
inline double energy_of(const SpectralState& s)
{
  const int h = s.grid.N / 2;
  const double x = s.grid.dxi();
  return -(s.values[h + 1] - 2.0 * s.values[h] + s.values[h - 1]).real() / (x * x);
}

/// Energy of the inverse transform on the velocity grid.
inline double grid_energy(const SpectralState& s) { return energy(inverse_fourier(s)); }

struct SpectralEvolveOptions
{
  int output_stride = 1;
  double energy_tolerance = 1e-4;
  double mass_drift_tolerance = 1e-12;
};

template <typename Rhs>
std::vector<cplx> rk4_step_complex(const std::vector<cplx>& y, double dt, Rhs&& rhs)
{
  const std::size_t n = y.size();
  auto k1 = rhs(y);
  std::vector<cplx> tmp(n);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + 0.5 * dt * k1[i];
  auto k2 = rhs(tmp);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + 0.5 * dt * k2[i];
  auto k3 = rhs(tmp);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + dt * k3[i];
  auto k4 = rhs(tmp);
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// RK4 integration of a Fourier-space right-hand side with exact Hermitian
/// symmetrization, frozen F(0) (after a drift check) and an energy guard.
template <typename Rhs>
std::vector<SpectralState> evolve_with(const SpectralState& s0, double T, double dt, Rhs&& rhs,
                                       const SpectralEvolveOptions& opt)
{
  const int steps = step_count(T, dt);
  const double h = T / steps;
  const int c = s0.grid.N / 2;
  SpectralState s = s0;
  hermitize(s.values);
  const cplx F0 = s.values[c];
  const double e0 = grid_energy(s);
  std::vector<SpectralState> traj{s};
  for (int n = 1; n <= steps; ++n) {
    s.values = rk4_step_complex(s.values, h, [&](const std::vector<cplx>& y) {
      return rhs(SpectralState{s.grid, y, s.t});
    });
    s.t = n * h;
    hermitize(s.values);
    if (std::abs(s.values[c] - F0) > opt.mass_drift_tolerance * std::abs(F0))
      throw SolverAbort("mass", "spectral mass drift " + std::to_string(std::abs(s.values[c] - F0)),
                        s.t);
    s.values[c] = F0;
    const double e = grid_energy(s);
    if (std::abs(e - e0) > opt.energy_tolerance * std::abs(e0))
      throw SolverAbort("energy", "spectral energy drift " + std::to_string((e - e0) / e0), s.t);
    if (n % opt.output_stride == 0 || n == steps)
      traj.push_back(s);
  }
  return traj;
}

/// Stability bound dt <= 1/(4 m int beta (1 + 2 delta m ||psi||)).
inline double spectral_dt_bound(double m, double total_beta, double delta, double psi_sup)
{
  return 0.25 / (m * total_beta * (1.0 + 2.0 * delta * m * psi_sup));
}

inline std::vector<SpectralState> evolve(const SpectralState& s0, const CrossSection& cs,
                                         const SpectralRhsConfig& cfg, double T, double dt,
                                         double psi_sup, const SpectralEvolveOptions& opt = {})
{
  if (!cs.integrable())
    throw std::domain_error("spectral evolution needs a cutoff kernel");
  const auto rule = angular_rule(cs, cfg.theta_nodes);
  const double m = std::abs(s0.values[s0.grid.N / 2]);
  const double bound = spectral_dt_bound(m, rule.total(), cfg.delta, psi_sup);
  if (dt > bound * (1 + 1e-12))
    throw std::invalid_argument("time step exceeds spectral stability bound " +
                                std::to_string(bound));
  return evolve_with(s0, T, dt,
                     [&](const SpectralState& s) { return spectral_rhs(s, rule, cfg); }, opt);
}

}  // namespace kinac
