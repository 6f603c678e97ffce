#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinac/cross_section.hpp"

namespace kinac {

struct ConfigError : std::runtime_error
{
  std::string key;
  int line;  // 0 when the key was not given in the file
  ConfigError(const std::string& k, int ln, const std::string& msg)
      : std::runtime_error(k.empty() ? msg
                                     : (ln > 0 ? "line " + std::to_string(ln) + ": " : std::string()) +
                                           k + ": " + msg),
        key(k), line(ln)
  {
  }
};

enum class Experiment { RelaxDirect, RelaxSpectral, RelaxWild, FokkerPlanck, GrazingSweep, Equilibrium, Consensus };

inline const char* to_string(Experiment e)
{
  switch (e) {
    case Experiment::RelaxDirect: return "relax-direct";
    case Experiment::RelaxSpectral: return "relax-spectral";
    case Experiment::RelaxWild: return "relax-wild";
    case Experiment::FokkerPlanck: return "fp";
    case Experiment::GrazingSweep: return "grazing-sweep";
    case Experiment::Equilibrium: return "equilibrium";
    case Experiment::Consensus: return "consensus";
  }
  return "";
}

struct RunConfig
{
  Experiment experiment = Experiment::FokkerPlanck;
  std::string output_dir = "run";

  struct
  {
    double L = 12.0;
    int N = 256;
  } grid;

  struct
  {
    double delta = 0.0;
    double mollifier_radius = 0.25;
    bool mollified = false;
  } quantum;

  struct
  {
    std::string kind = "constant";  // constant | power-law | grazing
    double value = 1.0;
    double nu = 1.5;
    std::optional<double> cutoff_n;
    double eps = 0.1;
    std::optional<double> mu;
    int theta_nodes = 32;
    std::string deposit = "cubic";  // cubic | linear
  } kernel;

  struct
  {
    double T = 1.0;
    double dt = 0.0;  // 0: automatic
    int output_stride = 1;
  } time;

  struct
  {
    std::string kind = "gaussian";  // gaussian | bimodal | bose-einstein | file
    double mass = 1.0;
    double energy = 1.0;
    double offset = 0.8;  // bimodal: peaks at +-offset
    std::string path;
  } initial;

  struct
  {
    int k_max = 16;
  } wild;

  struct
  {
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    double theta_split = 0.0;
    int outer_nodes = 32;
    std::string reference = "spectral";  // spectral | finite-volume
  } sweep;

  struct
  {
    int oversample = 16;
  } spectral;

  struct
  {
    bool small_angle_limit = false;
  } fp;

  // key -> line it was set on (for messages); also the resolved values
  std::map<std::string, int> lines;

  int line_of(const std::string& key) const
  {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  }

  /// The kernel described by the kernel.* keys.
  CrossSection cross_section() const
  {
    CrossSection cs;
    if (kernel.kind == "constant")
      cs = CrossSection::constant(kernel.value);
    else if (kernel.kind == "power-law")
      cs = CrossSection::power_law(kernel.nu);
    else
      cs = grazing_normalize(*kernel.mu, kernel.eps);
    if (kernel.cutoff_n)
      cs = cs.with_cutoff(*kernel.cutoff_n);
    return cs;
  }

  bool kinetic() const
  {
    return experiment == Experiment::RelaxDirect || experiment == Experiment::RelaxSpectral ||
           experiment == Experiment::RelaxWild || experiment == Experiment::Consensus;
  }
};

namespace detail {

inline std::string trim(const std::string& s)
{
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  return s.substr(a, b - a);
}

inline std::string unquote(const std::string& s)
{
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

inline double parse_double(const std::string& key, int line, const std::string& v)
{
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x))
    throw ConfigError(key, line, "expected a number, got '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, int line, const std::string& v)
{
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, line, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size() || x < -2147483647L || x > 2147483647L)
    throw ConfigError(key, line, "expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, int line, const std::string& v)
{
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigError(key, line, "expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, int line, const std::string& v)
{
  std::string s = v;
  if (!s.empty() && s.front() == '[' && s.back() == ']')
    s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_double(key, line, trim(item)));
  if (out.empty())
    throw ConfigError(key, line, "expected a comma-separated list of numbers");
  return out;
}

inline std::string parse_choice(const std::string& key, int line, const std::string& v,
                                std::initializer_list<const char*> choices)
{
  std::string all;
  for (const char* c : choices) {
    if (v == c)
      return v;
    all += all.empty() ? c : std::string(", ") + c;
  }
  throw ConfigError(key, line, "expected one of {" + all + "}, got '" + v + "'");
}

inline Experiment parse_experiment(int line, const std::string& v)
{
  for (auto e : {Experiment::RelaxDirect, Experiment::RelaxSpectral, Experiment::RelaxWild,
                 Experiment::FokkerPlanck, Experiment::GrazingSweep, Experiment::Equilibrium,
                 Experiment::Consensus})
    if (v == to_string(e))
      return e;
  throw ConfigError("experiment", line,
                    "unknown experiment '" + v +
                        "' (relax-direct, relax-spectral, relax-wild, fp, grazing-sweep, "
                        "equilibrium, consensus)");
}

inline void set_key(RunConfig& c, const std::string& k, const std::string& v, int ln)
{
  auto num = [&] { return parse_double(k, ln, v); };
  auto integer = [&] { return parse_int(k, ln, v); };
  if (k == "experiment") c.experiment = parse_experiment(ln, v);
  else if (k == "output_dir") c.output_dir = v;
  else if (k == "grid.L") c.grid.L = num();
  else if (k == "grid.N") c.grid.N = integer();
  else if (k == "quantum.delta") c.quantum.delta = num();
  else if (k == "quantum.mollifier_radius") c.quantum.mollifier_radius = num();
  else if (k == "quantum.mollified") c.quantum.mollified = parse_bool(k, ln, v);
  else if (k == "kernel.kind") c.kernel.kind = parse_choice(k, ln, v, {"constant", "power-law", "grazing"});
  else if (k == "kernel.value") c.kernel.value = num();
  else if (k == "kernel.nu") c.kernel.nu = num();
  else if (k == "kernel.cutoff_n") c.kernel.cutoff_n = num();
  else if (k == "kernel.eps") c.kernel.eps = num();
  else if (k == "kernel.mu") c.kernel.mu = num();
  else if (k == "kernel.theta_nodes") c.kernel.theta_nodes = integer();
  else if (k == "kernel.deposit") c.kernel.deposit = parse_choice(k, ln, v, {"cubic", "linear"});
  else if (k == "time.T") c.time.T = num();
  else if (k == "time.dt") c.time.dt = num();
  else if (k == "time.output_stride") c.time.output_stride = integer();
  else if (k == "initial.kind")
    c.initial.kind = parse_choice(k, ln, v, {"gaussian", "bimodal", "bose-einstein", "file"});
  else if (k == "initial.mass") c.initial.mass = num();
  else if (k == "initial.energy") c.initial.energy = num();
  else if (k == "initial.offset") c.initial.offset = num();
  else if (k == "initial.path") c.initial.path = v;
  else if (k == "wild.k_max") c.wild.k_max = integer();
  else if (k == "sweep.eps") c.sweep.eps = parse_list(k, ln, v);
  else if (k == "sweep.theta_split") c.sweep.theta_split = num();
  else if (k == "sweep.outer_nodes") c.sweep.outer_nodes = integer();
  else if (k == "sweep.reference") c.sweep.reference = parse_choice(k, ln, v, {"spectral", "finite-volume"});
  else if (k == "spectral.oversample") c.spectral.oversample = integer();
  else if (k == "fp.small_angle_limit") c.fp.small_angle_limit = parse_bool(k, ln, v);
  else throw ConfigError(k, ln, "unknown key");
}

}  // namespace detail

/// Checks every numeric field against the preconditions of the module the
/// experiment dispatches to.
inline void validate(const RunConfig& c)
{
  auto fail = [&](const std::string& key, const std::string& msg) {
    throw ConfigError(key, c.line_of(key), msg);
  };
  if (!(c.grid.L > 0.0))
    fail("grid.L", "L must be positive");
  if (c.grid.N < 16 || (c.grid.N & (c.grid.N - 1)) != 0)
    fail("grid.N", "N must be a power of two (at least 16)");
  if (!(c.quantum.delta >= 0.0))
    fail("quantum.delta", "delta must be nonnegative");
  if (c.quantum.mollified || c.experiment == Experiment::RelaxWild ||
      c.experiment == Experiment::Consensus) {
    if (!(c.quantum.mollifier_radius > 0.0))
      fail("quantum.mollifier_radius", "mollifier radius must be positive");
    if (!(c.quantum.mollifier_radius < c.grid.L / 4))
      fail("quantum.mollifier_radius", "mollifier radius must be below L/4");
  }
  if (c.kernel.kind == "grazing") {
    if (!c.kernel.mu)
      fail("kernel.mu", "missing key kernel.mu (required for kernel.kind = grazing)");
    if (!(*c.kernel.mu > 0.0 && *c.kernel.mu < 1.0))
      fail("kernel.mu", "mu must lie in (0, 1)");
    if (!(c.kernel.eps > 0.0))
      fail("kernel.eps", "eps must be positive");
  }
  if (c.kernel.kind == "power-law" && !(c.kernel.nu > 1.0 && c.kernel.nu < 2.0))
    fail("kernel.nu", "nu must lie in (1, 2)");
  if (c.kernel.kind == "constant" && !(c.kernel.value >= 0.0))
    fail("kernel.value", "kernel value must be nonnegative");
  if (c.kernel.cutoff_n && !(*c.kernel.cutoff_n > 0.0))
    fail("kernel.cutoff_n", "cutoff level must be positive");
  if (c.kernel.theta_nodes < 2)
    fail("kernel.theta_nodes", "need at least two angular nodes");
  if (!(c.time.T > 0.0))
    fail("time.T", "T must be positive");
  if (!(c.time.dt >= 0.0))
    fail("time.dt", "dt must be nonnegative (0 selects it automatically)");
  if (c.time.output_stride < 1)
    fail("time.output_stride", "output_stride must be at least 1");
  if (!(c.initial.mass > 0.0))
    fail("initial.mass", "mass must be positive");
  if (!(c.initial.energy > 0.0))
    fail("initial.energy", "energy must be positive");
  if (c.initial.kind == "bimodal" && !(c.initial.offset * c.initial.offset < c.initial.energy / c.initial.mass))
    fail("initial.offset", "bimodal offset^2 must be below energy/mass");
  if (c.initial.kind == "file" && c.initial.path.empty())
    fail("initial.path", "missing key initial.path (required for initial.kind = file)");
  if (c.wild.k_max < 1 || c.wild.k_max > 60)
    fail("wild.k_max", "k_max must lie in [1, 60]");
  if (c.spectral.oversample < 1)
    fail("spectral.oversample", "oversample must be positive");

  if (c.kinetic()) {
    if (c.kernel.kind == "grazing" || c.kernel.kind == "power-law")
      if (!c.kernel.cutoff_n)
        fail("kernel.cutoff_n", std::string("experiment ") + to_string(c.experiment) +
                                    " needs a cutoff kernel (set kernel.cutoff_n)");
    if ((c.experiment == Experiment::RelaxWild || c.experiment == Experiment::Consensus) &&
        c.quantum.delta > 0.0 && !c.quantum.mollified)
      fail("quantum.mollified", "the Wild expansion needs the mollified model when delta > 0");
  }
  if (c.experiment == Experiment::GrazingSweep) {
    if (c.kernel.kind != "grazing")
      fail("kernel.kind", "grazing-sweep needs kernel.kind = grazing");
    if (c.kernel.cutoff_n)
      fail("kernel.cutoff_n", "grazing-sweep uses the untruncated family");
    for (std::size_t i = 0; i < c.sweep.eps.size(); ++i) {
      if (!(c.sweep.eps[i] > 0.0))
        fail("sweep.eps", "eps values must be positive");
      if (i > 0 && !(c.sweep.eps[i] < c.sweep.eps[i - 1]))
        fail("sweep.eps", "eps list must be strictly decreasing");
    }
    if (c.sweep.outer_nodes < 2)
      fail("sweep.outer_nodes", "need at least two angular nodes");
  }
  if (c.experiment == Experiment::Equilibrium && c.quantum.delta > 0.0) {
    // a delta < 1 is checked after the solve
  }
}

inline RunConfig parse_config_text(const std::string& text)
{
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  bool have_experiment = false;
  while (std::getline(in, raw)) {
    ++ln;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", ln, "line " + std::to_string(ln) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("", ln, "line " + std::to_string(ln) + ": empty key");
    if (c.lines.count(key))
      throw ConfigError(key, ln, "duplicate key (first set on line " + std::to_string(c.lines[key]) + ")");
    detail::set_key(c, key, value, ln);
    c.lines[key] = ln;
    have_experiment |= key == "experiment";
  }
  if (!have_experiment)
    throw ConfigError("experiment", 0, "missing key experiment");
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace kinac
