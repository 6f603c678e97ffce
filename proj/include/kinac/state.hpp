#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/cross_section.hpp"
#include "kinac/fft.hpp"
#include "kinac/parallel.hpp"

namespace kinac {

/// Uniform grid v_i = -L + i dv, i = 0..N-1, dv = 2L/N (v_{N/2} = 0).
struct VelocityGrid
{
  double L = 12.0;
  int N = 256;

  VelocityGrid() = default;
  VelocityGrid(double L_, int N_) : L(L_), N(N_)
  {
    if (!(L > 0.0))
      throw std::invalid_argument("grid half-width L must be positive");
    if (N < 16 || (N & (N - 1)) != 0)
      throw std::invalid_argument("N must be a power of two and at least 16");
  }

  double dv() const { return 2.0 * L / N; }
  double v(int i) const { return -L + i * dv(); }
  double dxi() const { return std::numbers::pi / L; }
  /// Frequency of spectral index j (j = 0..N-1 stands for k = j - N/2).
  double xi(int j) const { return (j - N / 2) * dxi(); }
  std::vector<double> nodes() const
  {
    std::vector<double> x(N);
    for (int i = 0; i < N; ++i)
      x[i] = v(i);
    return x;
  }
  bool operator==(const VelocityGrid& o) const { return L == o.L && N == o.N; }
};

struct Distribution
{
  VelocityGrid grid;
  std::vector<double> values;

  Distribution() = default;
  explicit Distribution(const VelocityGrid& g) : grid(g), values(g.N, 0.0) {}
  Distribution(const VelocityGrid& g, std::vector<double> f) : grid(g), values(std::move(f))
  {
    if (static_cast<int>(values.size()) != grid.N)
      throw std::invalid_argument("distribution size does not match grid");
  }

  template <typename F>
  static Distribution sample(const VelocityGrid& g, F&& fn)
  {
    Distribution d(g);
    for (int i = 0; i < g.N; ++i)
      d.values[i] = fn(g.v(i));
    return d;
  }

  double operator[](int i) const { return values[i]; }
  int size() const { return grid.N; }
};

inline double mass(const Distribution& f)
{
  double s = 0.0;
  for (double x : f.values)
    s += x;
  return s * f.grid.dv();
}

inline double energy(const Distribution& f)
{
  double s = 0.0;
  for (int i = 0; i < f.grid.N; ++i) {
    const double v = f.grid.v(i);
    s += v * v * f.values[i];
  }
  return s * f.grid.dv();
}

/// L^1_p norm: integral of (1 + |v|^p) |f|.
inline double moment_p(const Distribution& f, double p)
{
  double s = 0.0;
  for (int i = 0; i < f.grid.N; ++i)
    s += (1.0 + std::pow(std::abs(f.grid.v(i)), p)) * std::abs(f.values[i]);
  return s * f.grid.dv();
}

/// Raw fourth moment integral of v^4 f.
inline double fourth_moment(const Distribution& f)
{
  double s = 0.0;
  for (int i = 0; i < f.grid.N; ++i) {
    const double v2 = f.grid.v(i) * f.grid.v(i);
    s += v2 * v2 * f.values[i];
  }
  return s * f.grid.dv();
}

inline double l1_distance(const Distribution& a, const Distribution& b)
{
  double s = 0.0;
  for (int i = 0; i < a.grid.N; ++i)
    s += std::abs(a.values[i] - b.values[i]);
  return s * a.grid.dv();
}

inline double sup_distance(const Distribution& a, const Distribution& b)
{
  double s = 0.0;
  for (int i = 0; i < a.grid.N; ++i)
    s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

/// Piecewise-linear interpolation of node values at x, zero outside [v_0, v_{N-1}].
inline double interpolate(const std::vector<double>& values, const VelocityGrid& g, double x)
{
  const double s = (x + g.L) / g.dv();
  if (!(s >= 0.0) || s > g.N - 1)
    return 0.0;
  int i = static_cast<int>(s);
  if (i >= g.N - 1)
    return values[g.N - 1];
  const double w = s - i;
  return (1.0 - w) * values[i] + w * values[i + 1];
}

struct Mollifier
{
  double radius = 0.5;
  VelocityGrid grid;
  std::vector<double> kernel;  // psi at offsets -K..K times dv, unit discrete mass
  int half_width = 0;          // K
  Distribution values;         // psi centred at v = 0
  double sup_norm = 0.0;
  double sup_norm_derivative = 0.0;
  std::vector<double> fourier;  // psi-hat on the frequency grid (real, even)

  double at(int offset) const
  {
    return std::abs(offset) > half_width ? 0.0 : kernel[offset + half_width];
  }
};

inline double bump(double x)
{
  return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
}

/// psi_r(v) = c exp(-1/(1 - (v/r)^2)) sampled on the grid and normalized so
/// that the discrete integral is one.
inline Mollifier make_mollifier(const VelocityGrid& g, double r)
{
  if (!(r > 0.0))
    throw std::invalid_argument("mollifier radius must be positive");
  if (r >= g.L / 4)
    throw std::invalid_argument("mollifier radius too large: need r < L/4");
  Mollifier m;
  m.radius = r;
  m.grid = g;
  const double dv = g.dv();
  m.half_width = static_cast<int>(std::floor(r / dv));
  if (m.half_width * dv >= r)
    --m.half_width;
  if (m.half_width < 0)
    m.half_width = 0;
  m.kernel.assign(2 * m.half_width + 1, 0.0);
  double s = 0.0;
  for (int k = -m.half_width; k <= m.half_width; ++k) {
    m.kernel[k + m.half_width] = bump(k * dv / r);
    s += m.kernel[k + m.half_width];
  }
  const double c = 1.0 / (s * dv);
  for (auto& x : m.kernel)
    x *= c;
  m.values = Distribution(g);
  for (int k = -m.half_width; k <= m.half_width; ++k)
    m.values.values[g.N / 2 + k] = m.at(k);
  m.sup_norm = *std::max_element(m.kernel.begin(), m.kernel.end());
  // |psi'| on a fine sampling of the continuous profile
  double dmax = 0.0;
  for (int i = 1; i < 4000; ++i) {
    const double x = -1.0 + i / 2000.0;
    const double b = bump(x);
    dmax = std::max(dmax, std::abs(b * (-2.0 * x / ((1 - x * x) * (1 - x * x)))));
  }
  m.sup_norm_derivative = dmax * c / r;
  m.fourier.assign(g.N, 0.0);
  for (int j = 0; j < g.N; ++j) {
    double acc = 0.0;
    for (int k = -m.half_width; k <= m.half_width; ++k)
      acc += m.at(k) * std::cos(k * dv * g.xi(j));
    m.fourier[j] = acc * dv;
  }
  return m;
}

/// Periodic discrete convolution f * psi (identical to the inverse transform
/// of f-hat psi-hat), evaluated directly over the compact support of psi.
inline Distribution mollify(const Distribution& f, const Mollifier& psi)
{
  if (!(psi.grid == f.grid))
    throw std::invalid_argument("mollifier grid does not match distribution");
  const int N = f.grid.N;
  const double dv = f.grid.dv();
  Distribution out(f.grid);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int k = -psi.half_width; k <= psi.half_width; ++k)
      acc += psi.at(k) * f.values[((i - k) % N + N) % N];
    out.values[i] = std::max(acc * dv, 0.0);
  }
  return out;
}

/// Bose-Einstein entropy; for delta = 0 the classical limit -f log f + f.
inline double entropy(const Distribution& f, double delta)
{
  double s = 0.0;
  for (double x : f.values) {
    const double y = std::max(x, 0.0);
    const double flogf = y > 0.0 ? y * std::log(y) : 0.0;
    if (delta > 0.0) {
      const double z = 1.0 + delta * y;
      s += z * std::log(z) / delta - flogf;
    } else {
      s += y - flogf;
    }
  }
  return s * f.grid.dv();
}

/// (a - b) log(a/b) >= 0, with both arguments floored at the smallest normal
/// double so exact zeros left by clipping give a large but finite value.
inline double gamma_fn(double a, double b)
{
  constexpr double tiny = std::numeric_limits<double>::min();
  a = std::max(a, tiny);
  b = std::max(b, tiny);
  return (a - b) * std::log(a / b);
}

/// Entropy production (1/4) int beta int int Gamma(...) with linearly
/// interpolated post-collision values; pairs whose rotated velocities leave
/// the grid are excluded.
inline double entropy_production(const Distribution& f, const CrossSection& cs, double delta,
                                 int theta_nodes)
{
  const auto rule = angular_rule(cs, theta_nodes);
  const auto& g = f.grid;
  const int N = g.N;
  const double dv = g.dv();
  const double lo = g.v(0), hi = g.v(N - 1);
  std::vector<double> part(rule.size(), 0.0);
  parallel_for(rule.size(), [&](std::size_t j) {
    const double c = std::cos(rule.theta[j]), s = std::sin(rule.theta[j]);
    double acc = 0.0;
    for (int a = 0; a < N; ++a) {
      const double va = g.v(a), fa = f.values[a];
      for (int b = 0; b < N; ++b) {
        const double vb = g.v(b);
        const double vp = va * c - vb * s, vsp = va * s + vb * c;
        if (vp < lo || vp > hi || vsp < lo || vsp > hi)
          continue;
        const double fp = interpolate(f.values, g, vp), fsp = interpolate(f.values, g, vsp);
        const double fb = f.values[b];
        const double x = fp * fsp * (1 + delta * fa) * (1 + delta * fb);
        const double y = fa * fb * (1 + delta * fp) * (1 + delta * fsp);
        acc += gamma_fn(x, y);
      }
    }
    part[j] = rule.weight[j] * acc;
  });
  double sum = 0.0;
  for (double p : part)
    sum += p;
  return 0.25 * sum * dv * dv;
}

struct EquilibriumParams
{
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
};

inline double bose_einstein_value(const EquilibriumParams& p, double v)
{
  const double x = p.a * std::exp(-p.b * v * v);
  return x / (1.0 - p.delta * x);
}

inline Distribution bose_einstein(const EquilibriumParams& p, const VelocityGrid& g)
{
  return Distribution::sample(g, [&](double v) { return bose_einstein_value(p, v); });
}

struct Equilibrium
{
  EquilibriumParams params;
  Distribution f;
  int iterations = 0;
};

/// Solves mass(f_BE) = m, energy(f_BE) = e on the grid by damped Newton
/// iteration in (log a, log b).
inline Equilibrium bose_einstein_equilibrium(double m, double e, double delta,
                                             const VelocityGrid& g)
{
  if (!(m > 0.0) || !(e > 0.0))
    throw std::invalid_argument("equilibrium needs positive mass and energy");
  if (!(delta >= 0.0))
    throw std::invalid_argument("delta must be nonnegative");
  double lb = std::log(m / (2.0 * e));
  double la = std::log(m * std::sqrt(std::exp(lb) / std::numbers::pi));
  if (delta > 0.0)
    la = std::min(la, std::log(0.5 / delta));

  auto residual = [&](double la_, double lb_, double J[2][2]) {
    EquilibriumParams p{std::exp(la_), std::exp(lb_), delta};
    double r0 = -m, r1 = -e;
    J[0][0] = J[0][1] = J[1][0] = J[1][1] = 0.0;
    const double dv = g.dv();
    for (int i = 0; i < g.N; ++i) {
      const double v = g.v(i), v2 = v * v;
      const double f = bose_einstein_value(p, v);
      const double df = f * (1.0 + delta * f);
      r0 += f * dv;
      r1 += v2 * f * dv;
      J[0][0] += df * dv;
      J[0][1] += -p.b * v2 * df * dv;
      J[1][0] += v2 * df * dv;
      J[1][1] += -p.b * v2 * v2 * df * dv;
    }
    return std::array<double, 2>{r0, r1};
  };

  auto norm = [&](const std::array<double, 2>& r) {
    return std::max(std::abs(r[0]) / m, std::abs(r[1]) / e);
  };

  double J[2][2];
  auto r = residual(la, lb, J);
  for (int it = 0; it < 200; ++it) {
    if (norm(r) < 1e-13) {
      EquilibriumParams p{std::exp(la), std::exp(lb), delta};
      return {p, bose_einstein(p, g), it};
    }
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    double d0 = -(J[1][1] * r[0] - J[0][1] * r[1]) / det;
    double d1 = -(-J[1][0] * r[0] + J[0][0] * r[1]) / det;
    double step = 1.0;
    const double cap = 1.0;  // keep log-steps bounded
    const double big = std::max(std::abs(d0), std::abs(d1));
    if (big > cap)
      step = cap / big;
    for (int h = 0; h < 60; ++h) {
      const double nla = la + step * d0, nlb = lb + step * d1;
      if (delta > 0.0 && std::exp(nla) * delta >= 1.0) {
        step *= 0.5;
        continue;
      }
      double Jn[2][2];
      auto rn = residual(nla, nlb, Jn);
      if (norm(rn) < norm(r) || h == 59) {
        la = nla;
        lb = nlb;
        r = rn;
        std::copy(&Jn[0][0], &Jn[0][0] + 4, &J[0][0]);
        break;
      }
      step *= 0.5;
    }
  }
  if (norm(r) < 1e-10) {
    EquilibriumParams p{std::exp(la), std::exp(lb), delta};
    return {p, bose_einstein(p, g), 200};
  }
  throw std::runtime_error("Bose-Einstein equilibrium: Newton iteration did not converge");
}

/// Fourier transform on xi_k = pi k / L, k = -N/2..N/2-1 (stored at index k + N/2).
struct SpectralState
{
  VelocityGrid grid;
  std::vector<cplx> values;
  double t = 0.0;

  cplx at_k(int k) const { return values[k + grid.N / 2]; }
};

/// Enforces F(-xi) = conj F(xi) and realness at k = 0 and k = -N/2.
inline void hermitize(std::vector<cplx>& F)
{
  const int N = static_cast<int>(F.size());
  const int h = N / 2;
  F[h] = cplx(F[h].real(), 0.0);
  F[0] = cplx(F[0].real(), 0.0);
  for (int k = 1; k < h; ++k) {
    const cplx avg = 0.5 * (F[h + k] + std::conj(F[h - k]));
    F[h + k] = avg;
    F[h - k] = std::conj(avg);
  }
}

/// Transform of arbitrary (complex) node values onto the frequency grid.
inline std::vector<cplx> fourier_values(const std::vector<cplx>& f, const VelocityGrid& g)
{
  const int N = g.N;
  const auto out = dft(f, -1);
  std::vector<cplx> F(N);
  const double dv = g.dv();
  for (int k = -N / 2; k < N / 2; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    F[k + N / 2] = sgn * dv * out[(k + N) % N];
  }
  return F;
}

inline std::vector<cplx> fourier_values(const std::vector<double>& f, const VelocityGrid& g)
{
  return fourier_values(std::vector<cplx>(f.begin(), f.end()), g);
}

inline SpectralState fourier(const Distribution& f)
{
  SpectralState s{f.grid, fourier_values(f.values, f.grid), 0.0};
  hermitize(s.values);
  return s;
}

/// Complex inverse transform values (real part is the distribution).
inline std::vector<cplx> inverse_fourier_complex(const SpectralState& s)
{
  const int N = s.grid.N;
  std::vector<cplx> in(N);
  for (int k = -N / 2; k < N / 2; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    in[(k + N) % N] = sgn * s.values[k + N / 2];
  }
  auto out = dft(in, +1);
  const double scale = 1.0 / (2.0 * s.grid.L);
  for (auto& x : out)
    x *= scale;
  return out;
}

inline Distribution inverse_fourier(const SpectralState& s)
{
  const auto c = inverse_fourier_complex(s);
  Distribution f(s.grid);
  for (int i = 0; i < s.grid.N; ++i)
    f.values[i] = c[i].real();
  return f;
}

inline double spectral_sup_distance(const SpectralState& a, const SpectralState& b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

/// Discretized Gagliardo seminorm squared: sum over x and |y| >= dv of
/// |f(x+y) - f(x)|^2 / |y|^{1+2s}, f extended by zero.
inline double sobolev_seminorm(const Distribution& f, double s)
{
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("Sobolev exponent must lie in (0, 1)");
  const int N = f.grid.N;
  const double dv = f.grid.dv();
  double acc = 0.0;
  for (int k = 1; k < 2 * N; ++k) {
    const double y = k * dv;
    const double w = std::pow(y, -(1.0 + 2.0 * s));
    double inner = 0.0;
    for (int i = -k; i < N; ++i) {
      const double a = (i >= 0 && i < N) ? f.values[i] : 0.0;
      const int j = i + k;
      const double b = (j >= 0 && j < N) ? f.values[j] : 0.0;
      inner += (b - a) * (b - a);
    }
    acc += 2.0 * w * inner;  // y and -y
  }
  return acc * dv * dv;
}

}  // namespace kinac
