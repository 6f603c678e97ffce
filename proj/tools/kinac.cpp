#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <fftw3.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinac/config.hpp"
#include "kinac/parallel.hpp"
#include "kinac/run.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_abort = 3;

void write_json(const std::filesystem::path& p, const nlohmann::ordered_json& j)
{
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  out << j.dump(2) << '\n';
}

int do_validate(const std::string& path)
{
  try {
    const auto cfg = kinac::parse_config(path);
    std::cout << kinac::to_json(cfg).dump(2) << '\n';
    return 0;
  } catch (const kinac::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  }
}

int do_run(const std::string& path, const std::string& output_dir, int threads)
{
  kinac::RunConfig cfg;
  try {
    cfg = kinac::parse_config(path);
  } catch (const kinac::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  }
  if (!output_dir.empty())
    cfg.output_dir = output_dir;
  kinac::set_threads(threads);
  const std::filesystem::path dir(cfg.output_dir);

  nlohmann::ordered_json manifest;
  manifest["config"] = kinac::to_json(cfg);
  manifest["versions"] = {{"kinac", kinac::version},
                          {"fftw", std::string(fftw_version)},
                          {"compiler", std::string(__VERSION__)},
                          {"cxx_standard", static_cast<long>(__cplusplus)}};
  manifest["threads"] = threads;

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  int code = 0;
  try {
    const auto summary = kinac::run_experiment(cfg, dir);
    manifest["status"] = "ok";
    manifest["resolved"] = summary.resolved;
    manifest["outputs"] = summary.files;
  } catch (const kinac::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  } catch (const kinac::SweepAbort& a) {
    nlohmann::ordered_json err = {{"status", "aborted"},     {"invariant", a.invariant},
                                  {"eps", a.eps},            {"message", a.what()},
                                  {"experiment", kinac::to_string(cfg.experiment)}};
    write_json(dir / "error.json", err);
    std::cout << err.dump() << '\n';
    manifest["status"] = "aborted";
    manifest["error"] = err;
    code = exit_abort;
  } catch (const kinac::SolverAbort& a) {
    nlohmann::ordered_json err = {{"status", "aborted"},  {"invariant", a.invariant},
                                  {"t", a.t},             {"message", a.what()},
                                  {"experiment", kinac::to_string(cfg.experiment)}};
    write_json(dir / "error.json", err);
    std::cout << err.dump() << '\n';
    manifest["status"] = "aborted";
    manifest["error"] = err;
    code = exit_abort;
  }
  manifest["wall_time"] = elapsed();
  write_json(dir / "manifest.json", manifest);
  return code;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Deterministic solvers for the Kac model of a Bose-Einstein gas"};
  app.require_subcommand(1);

  std::string config, output_dir;
  int threads = 1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string vconfig;
  auto* val = app.add_subcommand("validate", "Parse and check a config file");
  val->add_option("config", vconfig, "Config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run)
      return do_run(config, output_dir, threads);
    return do_validate(vconfig);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
