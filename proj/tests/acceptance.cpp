// Acceptance checks on the benchmark problem: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kinac/collision_direct.hpp"
#include "kinac/cross_section.hpp"
#include "kinac/fokker_planck.hpp"
#include "kinac/grazing.hpp"
#include "kinac/spectral.hpp"
#include "kinac/state.hpp"
#include "kinac/wild.hpp"

using namespace kinac;

namespace {

// benchmark: m = e = 1, delta = 0.5, mollifier radius 0.25, cutoff 50, T = 0.5
constexpr double bench_L = 6.0;
constexpr double bench_delta = 0.5;
constexpr double bench_r = 0.25;
constexpr double bench_T = 0.5;

CrossSection bench_kernel() { return grazing_normalize(0.5, 0.2).with_cutoff(50.0); }

Distribution bimodal(const VelocityGrid& g)
{
  const double a = 0.8, s2 = 0.36;
  return Distribution::sample(g, [&](double v) {
    return 0.5 / std::sqrt(2 * std::numbers::pi * s2) *
           (std::exp(-(v - a) * (v - a) / (2 * s2)) + std::exp(-(v + a) * (v + a) / (2 * s2)));
  });
}

Distribution gaussian(const VelocityGrid& g, double m = 1.0, double e = 1.0)
{
  const double s2 = e / m;
  return Distribution::sample(
      g, [&](double v) { return m / std::sqrt(2 * std::numbers::pi * s2) * std::exp(-v * v / (2 * s2)); });
}

double l1(const std::vector<double>& q, double dv)
{
  double s = 0.0;
  for (double x : q)
    s += std::abs(x);
  return s * dv;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string sci(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Level
{
  int N, theta_nodes, k_max;
  double dt_scale;
};

struct ConsensusRun
{
  Distribution f0, direct, wild;
  SpectralState spectral;
  std::vector<double> direct_mass, direct_energy, spectral_mass, spectral_energy, wild_mass,
      wild_energy;
  double seconds = 0.0;
};

ConsensusRun consensus_run(const Level& lv)
{
  const auto start = std::chrono::steady_clock::now();
  const VelocityGrid g(bench_L, lv.N);
  const auto cs = bench_kernel();
  const auto psi = make_mollifier(g, bench_r);
  ConsensusRun out;
  out.f0 = bimodal(g);
  const double m = mass(out.f0);

  CollisionConfig cc;
  cc.delta = bench_delta;
  cc.theta_nodes = lv.theta_nodes;
  cc.mollified = true;
  cc.psi = psi;
  const auto rule = angular_rule(cs, lv.theta_nodes);
  const double dt = spectral_dt_bound(m, rule.total(), bench_delta, psi.sup_norm) * lv.dt_scale;

  RelaxOptions ro;
  ro.entropy_production = false;
  const auto d = relax(out.f0, cs, cc, bench_T, dt, ro);
  for (const auto& p : d) {
    out.direct_mass.push_back(p.mass);
    out.direct_energy.push_back(p.energy);
  }
  out.direct = d.back().f;

  SpectralRhsConfig sc;
  sc.delta = bench_delta;
  sc.psi_hat = psi.fourier;
  sc.theta_nodes = lv.theta_nodes;
  const auto s = evolve(fourier(out.f0), cs, sc, bench_T, dt, psi.sup_norm);
  for (const auto& p : s) {
    out.spectral_mass.push_back(p.values[p.grid.N / 2].real());
    out.spectral_energy.push_back(grid_energy(p));
  }
  out.spectral = s.back();

  const auto w = wild_march(out.f0, make_wild_setup(out.f0, cs, lv.theta_nodes, bench_delta, psi),
                            lv.k_max, bench_T);
  for (const auto& p : w) {
    out.wild_mass.push_back(mass(p.f));
    out.wild_energy.push_back(energy(p.f));
  }
  out.wild = w.back().f;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::array<double, 3> pairwise(const ConsensusRun& r)
{
  const auto d = fourier(r.direct), w = fourier(r.wild);
  return {spectral_sup_distance(d, r.spectral), spectral_sup_distance(d, w),
          spectral_sup_distance(r.spectral, w)};
}

double max_rel_drift(const std::vector<double>& xs)
{
  double worst = 0.0;
  for (double x : xs)
    worst = std::max(worst, rel(x, xs.front()));
  return worst;
}

std::optional<ConsensusRun> coarse_run, fine_run;
const Level coarse{128, 32, 16, 1.0};
const Level fine{256, 64, 24, 0.5};

const ConsensusRun& fine_consensus()
{
  if (!fine_run)
    fine_run = consensus_run(fine);
  return *fine_run;
}

const ConsensusRun& coarse_consensus()
{
  if (!coarse_run)
    coarse_run = consensus_run(coarse);
  return *coarse_run;
}

struct Result
{
  bool pass;
  std::string detail;
};

Result criterion1()
{
  const auto r = consensus_run(Level{256, 32, 16, 1.0});
  const double dm = std::max({max_rel_drift(r.direct_mass), max_rel_drift(r.spectral_mass),
                              max_rel_drift(r.wild_mass)});
  const double de = std::max({max_rel_drift(r.direct_energy), max_rel_drift(r.spectral_energy),
                              max_rel_drift(r.wild_energy)});

  const VelocityGrid g(bench_L, 256);
  FPConfig fc;
  fc.delta = bench_delta;
  fc.mollified = true;
  fc.psi = make_mollifier(g, bench_r);
  const auto f0 = bimodal(g);
  const auto traj = fp_evolve(f0, fc, bench_T);
  double fm = 0.0, fe = 0.0;
  for (const auto& p : traj) {
    fm = std::max(fm, rel(p.mass, traj.front().mass));
    fe = std::max(fe, rel(p.energy, traj.front().energy) / bench_T);
  }
  const bool pass = dm <= 1e-8 && de <= 1e-5 && fm <= 1e-13 && fe <= 1e-6;
  return {pass, "kinetic mass " + sci(dm) + " energy " + sci(de) + "; FP mass " + sci(fm) +
                    " energy/T " + sci(fe)};
}

Result criterion2()
{
  const VelocityGrid g(bench_L, 256);
  const auto cs = bench_kernel();
  CollisionConfig cc;
  cc.delta = bench_delta;
  const auto f0 = bimodal(g);
  const auto rule = angular_rule(cs, cc.theta_nodes);
  const double dt = 1.0 / (2.0 * loss_rate_constant(f0, rule, cc));
  const auto traj = relax(f0, cs, cc, bench_T, dt);
  double worst_dH = 0.0, min_D = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    min_D = std::min(min_D, traj[i].entropy.D);
    if (i > 0)
      worst_dH = std::min(worst_dH, traj[i].entropy.H - traj[i - 1].entropy.H);
  }
  const bool pass = worst_dH >= -1e-6 && min_D >= -1e-6;
  return {pass, std::to_string(traj.size() - 1) + " steps; min dH " + sci(worst_dH) + ", min D " +
                    sci(min_D) + ", clipped " + sci(traj.back().clipped_mass)};
}

Result criterion3()
{
  const auto cs = bench_kernel();
  std::string detail;
  bool pass = true;
  for (double delta : {0.0, 0.5, 1.0}) {
    double q[2], r[2];
    for (int lv = 0; lv < 2; ++lv) {
      const VelocityGrid g(bench_L, 256 << lv);
      const auto eq = bose_einstein_equilibrium(1.0, 1.0, delta, g);
      CollisionConfig cc;
      cc.delta = delta;
      cc.theta_nodes = 32 << lv;
      q[lv] = l1(q_qbe(eq.f, cs, cc), g.dv());
      r[lv] = fp_steady_residual(eq.f, delta);
    }
    pass &= q[0] <= 5e-3 && r[0] <= 5e-3 && q[1] <= 0.5 * q[0] && r[1] <= 0.5 * r[0];
    detail += "delta " + std::to_string(delta).substr(0, 3) + ": Q " + sci(q[0]) + "->" + sci(q[1]) + ", FP " +
              sci(r[0]) + "->" + sci(r[1]) + "; ";
  }
  return {pass, detail};
}

Result criterion4()
{
  const VelocityGrid g(bench_L, 256);
  const auto cs = bench_kernel();
  const auto f0 = bimodal(g);
  const double m = mass(f0), e = energy(f0), M0 = fourth_moment(f0);

  CollisionConfig cc;
  cc.theta_nodes = 64;
  const auto rule = angular_rule(cs, cc.theta_nodes);
  RelaxOptions ro;
  ro.entropy_production = false;
  ro.output_stride = 1 << 30;
  const auto d = relax(f0, cs, cc, bench_T, 1.0 / (2.0 * loss_rate_constant(f0, rule, cc)), ro);
  const double A_star = angular_moments(cs).A_star;
  const double inf = 3 * e * e / m;
  const double kac = inf + (M0 - inf) * std::exp(-2 * A_star * m * bench_T);
  const double err_kac = rel(d.back().M4, kac);

  FPOptions fo;
  fo.output_stride = 1 << 30;
  const auto fp = fp_evolve(f0, FPConfig{}, bench_T, 0.0, fo);
  // the Fokker-Planck rate uses the normalized form 3e^2 + (M4 - 3e^2) e^{-4t} with m = 1
  const double fpx = fp_fourth_moment_exact(m, e, M0, bench_T);
  const double err_fp = rel(fp.back().M4, fpx);
  return {err_kac <= 1e-3 && err_fp <= 1e-3,
          "Kac M4 rel err " + sci(err_kac) + ", FP M4 rel err " + sci(err_fp)};
}

Result criterion5()
{
  const auto& c = coarse_consensus();
  const auto& f = fine_consensus();
  const auto pc = pairwise(c), pf = pairwise(f);
  bool pass = true;
  std::string detail;
  const char* names[3] = {"direct-spectral", "direct-wild", "spectral-wild"};
  for (int i = 0; i < 3; ++i) {
    pass &= pf[i] <= 1e-3 && pf[i] < pc[i];
    detail += std::string(names[i]) + " " + sci(pc[i]) + "->" + sci(pf[i]) + "; ";
  }
  detail += "runtime " + sci(c.seconds + f.seconds) + " s";
  return {pass, detail};
}

Result criterion6()
{
  // b_k = C(2k, k) / 4^k exactly
  const auto b = wild_coefficients(10);
  bool exact = true;
  double binom = 1.0;
  for (int k = 0; k <= 10; ++k) {
    if (k > 0)
      binom = binom * (2 * k) * (2 * k - 1) / (k * k);
    exact &= b[k] * std::ldexp(1.0, 2 * k) == binom;
  }

  const VelocityGrid g(bench_L, 128);
  const auto cs = bench_kernel();
  const auto psi = make_mollifier(g, bench_r);
  const auto f = bimodal(g);
  const auto w = make_wild_setup(f, cs, 32, bench_delta, psi);
  const auto P = p_trilinear(f, f, f, w);
  CollisionConfig cc;
  cc.delta = bench_delta;
  cc.mollified = true;
  cc.psi = psi;
  const auto Q = q_qbe(f, cs, cc);
  std::vector<double> diff(g.N);
  for (int i = 0; i < g.N; ++i)
    diff[i] = P[i] - w.K() * f.values[i] - Q[i];
  const double id_err = l1(diff, g.dv()) / l1(Q, g.dv());

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double ratio = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    Distribution a(g), bb(g), c(g);
    for (int i = 0; i < g.N; ++i) {
      const double env = std::exp(-0.5 * g.v(i) * g.v(i));
      const double shift = trial < 3 ? 1.0 : 0.0;  // nonnegative, then signed
      a.values[i] = env * (shift + u(rng));
      bb.values[i] = env * (shift + u(rng));
      c.values[i] = env * (shift + u(rng));
    }
    const auto p = p_trilinear(a, bb, c, w);
    ratio = std::max(ratio, l1(p, g.dv()) / (l1(a.values, g.dv()) * l1(bb.values, g.dv()) *
                                              l1(c.values, g.dv())));
  }
  const bool pass = exact && id_err <= 1e-6 && ratio <= w.C_P();
  return {pass, std::string("b_k exact ") + (exact ? "yes" : "no") + "; |P - Kf - Q|/|Q| " +
                    sci(id_err) + "; trilinear ratio " + sci(ratio) + " <= C_P " + sci(w.C_P())};
}

struct SweepPair
{
  GrazingSweep s0, s5;
  double seconds = 0.0;
};

std::optional<SweepPair> sweeps;

const SweepPair& grazing_sweeps()
{
  if (!sweeps) {
    const auto start = std::chrono::steady_clock::now();
    const VelocityGrid g(bench_L, 64);
    const auto f0 = bimodal(g);
    SweepPair p;
    p.s0 = run_sweep(f0, 0.0, std::nullopt, GrazingSweep{});
    p.s5 = run_sweep(f0, bench_delta, make_mollifier(g, bench_r), GrazingSweep{});
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sweeps = p;
  }
  return *sweeps;
}

bool strictly_decreasing(const std::vector<double>& x)
{
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] < x[i - 1]))
      return false;
  return true;
}

std::string list(const std::vector<double>& x)
{
  std::string s;
  for (double v : x)
    s += (s.empty() ? "" : ",") + sci(v);
  return s;
}

Result criterion7()
{
  const auto& sw = grazing_sweeps();
  const VelocityGrid g(bench_L, 64);
  const auto s = fourier(bimodal(g));
  const auto t0 = taylor_structure_check(s, 0.0, std::nullopt);
  const auto t5 = taylor_structure_check(s, bench_delta, make_mollifier(g, bench_r));
  const double first = std::max(t0.first_order, t5.first_order);
  const bool pass = strictly_decreasing(sw.s0.errors) && strictly_decreasing(sw.s5.errors) &&
                    strictly_decreasing(sw.s0.operator_errors) &&
                    strictly_decreasing(sw.s5.operator_errors) && first <= 1e-12 &&
                    sw.seconds <= 600.0;
  return {pass, "delta 0: " + list(sw.s0.errors) + "; delta 0.5: " + list(sw.s5.errors) +
                    "; operator " + list(sw.s5.operator_errors) + "; first-order " + sci(first) +
                    "; " + sci(sw.seconds) + " s"};
}

Result criterion8()
{
  const auto& sw = grazing_sweeps();
  const VelocityGrid g(bench_L, 64);
  const double f0_norm = moment_p(bimodal(g), 4.0);
  bool pass = true;
  std::string detail;
  for (const auto* s : {&sw.s0, &sw.s5}) {
    const auto& v = s->sup_L14;
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    // bound fitted on the coarsest eps only; the others are predictions
    const double lambda_fit = 1.2 * v.front();
    pass &= hi <= 1.2 * lo && hi <= std::max(lambda_fit, f0_norm);
    detail += "[" + list(v) + "] spread " + sci(hi / lo - 1) + " bound " + sci(std::max(lambda_fit, f0_norm)) + "; ";
  }
  return {pass, detail};
}

Result criterion9()
{
  const VelocityGrid g(bench_L, 256);
  const auto [lhs, rhs] = cancellation_identity_check(gaussian(g), bench_kernel(), 32);
  const double err = rel(lhs, rhs);
  return {err <= 1e-3, "lhs " + sci(lhs) + ", rhs " + sci(rhs) + ", rel " + sci(err)};
}

}  // namespace

int main(int argc, char** argv)
{
  const std::map<int, std::function<Result()>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    if (!selected.empty() && !selected.count(id))
      continue;
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  (%.1f s)\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
