#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinac/collision_direct.hpp"
#include "kinac/config.hpp"
#include "kinac/fokker_planck.hpp"
#include "kinac/grazing.hpp"
#include "kinac/spectral.hpp"
#include "kinac/state.hpp"
#include "kinac/wild.hpp"

namespace kinac {

inline constexpr const char* version = "0.1.0";

/// Shortest-safe round trip representation (17 significant digits).
inline std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string time_tag(double t)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

class CsvWriter
{
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
  {
    std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_)
      throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& xs)
  {
    for (std::size_t i = 0; i < xs.size(); ++i)
      out_ << (i ? "," : "") << fmt(xs[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline void write_snapshot(const std::filesystem::path& dir, const Distribution& f, double t)
{
  CsvWriter w(dir / ("t_" + time_tag(t) + ".csv"), {"v", "f"});
  for (int i = 0; i < f.grid.N; ++i)
    w.row({f.grid.v(i), f.values[i]});
}

inline void write_snapshot(const std::filesystem::path& dir, const SpectralState& s, double t)
{
  CsvWriter w(dir / ("t_" + time_tag(t) + ".csv"), {"xi", "re", "im"});
  for (int j = 0; j < s.grid.N; ++j)
    w.row({s.grid.xi(j), s.values[j].real(), s.values[j].imag()});
}

/// Two-column (v, f) table, optional header line; linearly interpolated onto
/// the grid and zero outside the sampled range.
inline Distribution read_distribution(const std::string& path, const VelocityGrid& g)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("initial.path", 0, "cannot open '" + path + "'");
  std::vector<double> v, f;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t')
        ch = ' ';
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      if (!v.empty() && !(a > v.back()))
        throw ConfigError("initial.path", 0, "velocities in '" + path + "' must increase");
      v.push_back(a);
      f.push_back(b);
    }
  }
  if (v.size() < 2)
    throw ConfigError("initial.path", 0, "'" + path + "' holds fewer than two (v, f) rows");
  return Distribution::sample(g, [&](double x) {
    if (x < v.front() || x > v.back())
      return 0.0;
    auto it = std::upper_bound(v.begin(), v.end(), x);
    const std::size_t k = std::min<std::size_t>(it - v.begin(), v.size() - 1);
    const double w = (x - v[k - 1]) / (v[k] - v[k - 1]);
    return (1 - w) * f[k - 1] + w * f[k];
  });
}

inline Distribution initial_distribution(const RunConfig& c, const VelocityGrid& g)
{
  const double m = c.initial.mass, e = c.initial.energy;
  const double pi = std::numbers::pi;
  if (c.initial.kind == "gaussian") {
    const double s2 = e / m;
    return Distribution::sample(g, [&](double v) { return m / std::sqrt(2 * pi * s2) * std::exp(-v * v / (2 * s2)); });
  }
  if (c.initial.kind == "bimodal") {
    const double a = c.initial.offset, s2 = e / m - a * a;
    return Distribution::sample(g, [&](double v) {
      return 0.5 * m / std::sqrt(2 * pi * s2) *
             (std::exp(-(v - a) * (v - a) / (2 * s2)) + std::exp(-(v + a) * (v + a) / (2 * s2)));
    });
  }
  if (c.initial.kind == "bose-einstein")
    return bose_einstein_equilibrium(m, e, c.quantum.delta, g).f;
  return read_distribution(c.initial.path, g);
}

inline nlohmann::ordered_json to_json(const RunConfig& c)
{
  nlohmann::ordered_json j;
  j["experiment"] = to_string(c.experiment);
  j["output_dir"] = c.output_dir;
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
  j["quantum"] = {{"delta", c.quantum.delta},
                  {"mollifier_radius", c.quantum.mollifier_radius},
                  {"mollified", c.quantum.mollified}};
  nlohmann::ordered_json k = {{"kind", c.kernel.kind},           {"value", c.kernel.value},
                              {"nu", c.kernel.nu},               {"eps", c.kernel.eps},
                              {"theta_nodes", c.kernel.theta_nodes}, {"deposit", c.kernel.deposit}};
  k["cutoff_n"] = c.kernel.cutoff_n ? nlohmann::ordered_json(*c.kernel.cutoff_n) : nullptr;
  k["mu"] = c.kernel.mu ? nlohmann::ordered_json(*c.kernel.mu) : nullptr;
  j["kernel"] = k;
  j["time"] = {{"T", c.time.T}, {"dt", c.time.dt}, {"output_stride", c.time.output_stride}};
  j["initial"] = {{"kind", c.initial.kind},
                  {"mass", c.initial.mass},
                  {"energy", c.initial.energy},
                  {"offset", c.initial.offset},
                  {"path", c.initial.path}};
  j["wild"] = {{"k_max", c.wild.k_max}};
  j["sweep"] = {{"eps", c.sweep.eps},
                {"theta_split", c.sweep.theta_split},
                {"outer_nodes", c.sweep.outer_nodes},
                {"reference", c.sweep.reference}};
  j["spectral"] = {{"oversample", c.spectral.oversample}};
  j["fp"] = {{"small_angle_limit", c.fp.small_angle_limit}};
  return j;
}

/// What a run resolved and produced, for the manifest.
struct RunSummary
{
  nlohmann::ordered_json resolved;  // solver parameters chosen at run time (dt, ...)
  std::vector<std::string> files;
};

namespace detail {

struct RunContext
{
  const RunConfig& cfg;
  std::filesystem::path dir;
  VelocityGrid grid;
  Distribution f0;
  CrossSection cs;
  std::optional<Mollifier> psi;
  RunSummary summary;

  std::filesystem::path path(const std::string& rel)
  {
    summary.files.push_back(rel);
    return dir / rel;
  }
};

inline CollisionConfig collision_config(const RunContext& r)
{
  CollisionConfig c;
  c.delta = r.cfg.quantum.delta;
  c.deposit = r.cfg.kernel.deposit == "linear" ? Deposit::Linear : Deposit::Cubic;
  c.theta_nodes = r.cfg.kernel.theta_nodes;
  c.mollified = r.cfg.quantum.mollified;
  c.psi = r.psi;
  return c;
}

inline SpectralRhsConfig spectral_rhs_config(const RunContext& r)
{
  SpectralRhsConfig c;
  c.delta = r.cfg.quantum.delta;
  if (r.cfg.quantum.mollified)
    c.psi_hat = r.psi->fourier;
  c.theta_nodes = r.cfg.kernel.theta_nodes;
  c.oversample = r.cfg.spectral.oversample;
  return c;
}

inline double quantum_sup(const RunContext& r)
{
  if (r.cfg.quantum.mollified)
    return r.psi->sup_norm;
  // unmollified: ||f|| / m plays the role of ||psi||
  return *std::max_element(r.f0.values.begin(), r.f0.values.end()) / mass(r.f0);
}

inline double step_or(const RunConfig& c, double bound, const std::string& what)
{
  if (c.time.dt == 0.0)
    return bound;
  if (c.time.dt > bound * (1 + 1e-12))
    throw ConfigError("time.dt", c.line_of("time.dt"),
                      "dt exceeds the " + what + " stability bound " + fmt(bound));
  return c.time.dt;
}

inline double direct_bound(const RunContext& r)
{
  const auto cc = collision_config(r);
  return 1.0 / (2.0 * loss_rate_constant(r.f0, angular_rule(r.cs, cc.theta_nodes), cc));
}

inline double spectral_bound(const RunContext& r)
{
  const auto rule = angular_rule(r.cs, r.cfg.kernel.theta_nodes);
  return spectral_dt_bound(mass(r.f0), rule.total(), r.cfg.quantum.delta, quantum_sup(r));
}

inline WildSetup wild_setup(const RunContext& r)
{
  const auto deposit = r.cfg.kernel.deposit == "linear" ? Deposit::Linear : Deposit::Cubic;
  return make_wild_setup(r.f0, r.cs, r.cfg.kernel.theta_nodes, r.cfg.quantum.delta, *r.psi, deposit);
}

inline double wild_bound(const RunContext& r)
{
  return wild_horizon(r.cfg.wild.k_max) / wild_setup(r).K() * (1 - 1e-9);
}

// Each solver writes <sub>/diagnostics.csv and <sub>/snapshots/ (sub may be empty).
inline std::vector<TrajectoryPoint> run_direct(RunContext& r, double dt, const std::string& sub = "")
{
  r.summary.resolved["direct_dt"] = dt;
  RelaxOptions o;
  o.output_stride = r.cfg.time.output_stride;
  auto traj = relax(r.f0, r.cs, collision_config(r), r.cfg.time.T, dt, o);
  const std::filesystem::path base(sub);
  CsvWriter w(r.path((base / "diagnostics.csv").string()),
              {"t", "mass", "energy", "M4", "H", "D", "clipped_mass"});
  for (const auto& p : traj) {
    w.row({p.t, p.mass, p.energy, p.M4, p.entropy.H, p.entropy.D, p.clipped_mass});
    write_snapshot(r.dir / base / "snapshots", p.f, p.t);
  }
  return traj;
}

inline std::vector<SpectralState> run_spectral(RunContext& r, double dt, const std::string& sub = "")
{
  const auto sc = spectral_rhs_config(r);
  const auto rule = angular_rule(r.cs, sc.theta_nodes);
  r.summary.resolved["spectral_dt"] = dt;
  SpectralEvolveOptions o;
  o.output_stride = r.cfg.time.output_stride;
  auto traj = evolve_with(fourier(r.f0), r.cfg.time.T, dt,
                          [&](const SpectralState& s) { return spectral_rhs(s, rule, sc); }, o);
  const std::filesystem::path base(sub);
  // energy: second difference of f-hat at 0; grid_energy: energy of the inverse transform
  CsvWriter w(r.path((base / "diagnostics.csv").string()), {"t", "mass", "energy", "M4", "grid_energy"});
  for (const auto& s : traj) {
    const auto f = inverse_fourier(s);
    w.row({s.t, s.values[s.grid.N / 2].real(), energy_of(s), fourth_moment(f), energy(f)});
    write_snapshot(r.dir / base / "snapshots", s, s.t);
  }
  return traj;
}

inline std::vector<WildPoint> run_wild(RunContext& r, double dt, const std::string& sub = "")
{
  r.summary.resolved["wild_dt"] = dt;
  auto traj = wild_march(r.f0, wild_setup(r), r.cfg.wild.k_max, r.cfg.time.T, dt,
                         r.cfg.time.output_stride);
  const std::filesystem::path base(sub);
  const double delta = r.cfg.quantum.delta;
  CsvWriter w(r.path((base / "diagnostics.csv").string()),
              {"t", "mass", "energy", "M4", "H", "D", "clipped_mass"});
  for (const auto& p : traj) {
    w.row({p.t, mass(p.f), energy(p.f), fourth_moment(p.f), entropy(p.f, delta),
           entropy_production(p.f, r.cs, delta, r.cfg.kernel.theta_nodes), 0.0});
    write_snapshot(r.dir / base / "snapshots", p.f, p.t);
  }
  return traj;
}

inline void run_fp(RunContext& r)
{
  FPConfig c;
  c.delta = r.cfg.quantum.delta;
  c.mollified = r.cfg.quantum.mollified;
  c.small_angle_limit = r.cfg.fp.small_angle_limit;
  c.psi = r.psi;
  const double cfl = fp_cfl(r.f0, fp_coefficients(r.f0, c).A);
  const double dt = r.cfg.time.dt > 0.0 ? r.cfg.time.dt : 0.9 * cfl;
  r.summary.resolved["fp_dt"] = dt;
  r.summary.resolved["fp_cfl"] = cfl;
  FPOptions o;
  o.output_stride = r.cfg.time.output_stride;
  const auto traj = fp_evolve(r.f0, c, r.cfg.time.T, dt, o);
  CsvWriter w(r.path("diagnostics.csv"),
              {"t", "mass", "energy", "M4", "A", "B", "steady_residual"});
  for (const auto& p : traj) {
    w.row({p.state.t, p.mass, p.energy, p.M4, p.state.A, p.state.B, p.steady_residual});
    write_snapshot(r.dir / "snapshots", p.state.f, p.state.t);
  }
  r.summary.files.push_back("snapshots/");
}

inline void run_grazing_sweep(RunContext& r)
{
  GrazingSweep sw;
  sw.mu = *r.cfg.kernel.mu;
  sw.eps_list = r.cfg.sweep.eps;
  sw.theta_split = r.cfg.sweep.theta_split;
  sw.T = r.cfg.time.T;
  sw.outer_nodes = r.cfg.sweep.outer_nodes;
  sw.reference =
      r.cfg.sweep.reference == "finite-volume" ? FPReference::FiniteVolume : FPReference::Spectral;
  try {
    sw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sweep.theta_split", r.cfg.line_of("sweep.theta_split"), e.what());
  }

  std::vector<std::unique_ptr<CsvWriter>> traj;
  std::vector<long> counter(sw.eps_list.size(), 0);
  for (double e : sw.eps_list)
    traj.push_back(std::make_unique<CsvWriter>(r.path("trajectory_eps_" + time_tag(e) + ".csv"),
                                               std::vector<std::string>{"t", "mass", "energy", "M4", "L14"}));
  const int stride = r.cfg.time.output_stride;
  sw = run_sweep(r.f0, r.cfg.quantum.delta, r.psi, sw, [&](std::size_t i, const SpectralState& s) {
    if (counter[i]++ % stride != 0 && std::abs(s.t - r.cfg.time.T) > 1e-12)
      return;
    const auto f = inverse_fourier(s);
    traj[i]->row({s.t, s.values[s.grid.N / 2].real(), energy(f), fourth_moment(f), moment_p(f, 4.0)});
  });
  traj.clear();

  CsvWriter d(r.path("diagnostics.csv"), {"eps", "sup_error", "sup_L14", "dt", "operator_error"});
  CsvWriter s(r.path("sweep.csv"), {"eps", "sup_error", "sup_L14", "wall_time"});
  for (std::size_t i = 0; i < sw.eps_list.size(); ++i) {
    d.row({sw.eps_list[i], sw.errors[i], sw.sup_L14[i], sw.dt[i], sw.operator_errors[i]});
    s.row({sw.eps_list[i], sw.errors[i], sw.sup_L14[i], sw.wall_time[i]});
  }
  r.summary.resolved["f0_L14"] = moment_p(r.f0, 4.0);
}

inline void run_equilibrium(RunContext& r)
{
  const double delta = r.cfg.quantum.delta;
  const auto eq = bose_einstein_equilibrium(r.cfg.initial.mass, r.cfg.initial.energy, delta, r.grid);
  if (!(eq.params.a * delta < 1.0))
    throw SolverAbort("equilibrium", "a delta = " + fmt(eq.params.a * delta) + " is not below 1", 0.0);
  FPConfig fc;
  fc.delta = delta;
  fc.mollified = r.cfg.quantum.mollified;
  fc.psi = r.psi;
  std::vector<std::string> header{"a", "b", "delta", "mass", "energy", "iterations", "fp_steady_residual"};
  std::vector<double> row{eq.params.a, eq.params.b, delta, mass(eq.f), energy(eq.f),
                          static_cast<double>(eq.iterations), fp_steady_residual(eq.f, fc)};
  if (r.cs.integrable()) {
    const auto Q = q_qbe(eq.f, r.cs, collision_config(r));
    double q1 = 0.0;
    for (double x : Q)
      q1 += std::abs(x);
    header.push_back("collision_residual");
    row.push_back(q1 * r.grid.dv());
  }
  CsvWriter w(r.path("diagnostics.csv"), header);
  w.row(row);
  write_snapshot(r.dir / "snapshots", eq.f, 0.0);
  r.summary.files.push_back("snapshots/");
  r.summary.resolved["a"] = eq.params.a;
  r.summary.resolved["b"] = eq.params.b;
}

/// All three kinetic solvers with one common step, so that the pairwise
/// differences can be taken at every output time.
inline void run_consensus(RunContext& r)
{
  const double bound = std::min({direct_bound(r), spectral_bound(r), wild_bound(r)});
  const double dt = step_or(r.cfg, bound, "consensus");
  const auto d = run_direct(r, dt, "direct");
  const auto s = run_spectral(r, dt, "spectral");
  const auto w = run_wild(r, dt, "wild");

  CsvWriter pw(r.path("pairwise_diffs.csv"), {"t", "direct_spectral", "direct_wild", "spectral_wild"});
  const std::size_t n = std::min({d.size(), s.size(), w.size()});
  for (std::size_t i = 0; i < n; ++i) {
    const SpectralState fd = fourier(d[i].f), fw = fourier(w[i].f);
    pw.row({d[i].t, spectral_sup_distance(fd, s[i]), spectral_sup_distance(fd, fw),
            spectral_sup_distance(s[i], fw)});
  }
  const double T = r.cfg.time.T;
  CsvWriter dg(r.path("diagnostics.csv"), {"solver", "t", "mass", "energy", "M4"});
  auto row = [&](double id, const Distribution& f) { dg.row({id, T, mass(f), energy(f), fourth_moment(f)}); };
  row(0, d.back().f);
  row(1, inverse_fourier(s.back()));
  row(2, w.back().f);
  r.summary.resolved["solver_ids"] = {{"0", "direct"}, {"1", "spectral"}, {"2", "wild"}};
}

}  // namespace detail

/// Runs the configured experiment, writing CSV output below dir. Throws
/// SolverAbort (or SweepAbort) when an invariant is violated.
inline RunSummary run_experiment(const RunConfig& cfg, const std::filesystem::path& dir)
{
  validate(cfg);
  std::filesystem::create_directories(dir);
  const VelocityGrid grid(cfg.grid.L, cfg.grid.N);
  detail::RunContext r{cfg, dir, grid, initial_distribution(cfg, grid), cfg.cross_section(), {}, {}};
  const bool need_psi = cfg.quantum.mollified || cfg.experiment == Experiment::RelaxWild ||
                        cfg.experiment == Experiment::Consensus;
  if (need_psi)
    r.psi = make_mollifier(grid, cfg.quantum.mollifier_radius);
  if (cfg.experiment == Experiment::GrazingSweep && !cfg.quantum.mollified)
    r.psi.reset();
  if (!(mass(r.f0) > 0.0))
    throw ConfigError("initial.kind", cfg.line_of("initial.kind"), "initial distribution has no mass on the grid");

  switch (cfg.experiment) {
    case Experiment::RelaxDirect:
      detail::run_direct(r, detail::step_or(cfg, detail::direct_bound(r), "direct"));
      break;
    case Experiment::RelaxSpectral:
      detail::run_spectral(r, detail::step_or(cfg, detail::spectral_bound(r), "spectral"));
      break;
    case Experiment::RelaxWild:
      detail::run_wild(r, detail::step_or(cfg, detail::wild_bound(r), "Wild series"));
      break;
    case Experiment::FokkerPlanck: detail::run_fp(r); break;
    case Experiment::GrazingSweep: detail::run_grazing_sweep(r); break;
    case Experiment::Equilibrium: detail::run_equilibrium(r); break;
    case Experiment::Consensus: detail::run_consensus(r); break;
  }
  return r.summary;
}

}  // namespace kinac
