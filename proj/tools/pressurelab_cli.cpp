#include <omp.h>

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "pressurelab/errors.hpp"
#include "pressurelab/lab.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> mode, map, out, eps_schedule, potential;
  std::optional<long long> seed;
  std::optional<int> depth, seeds;
  std::optional<double> tol;
  int workers = 0;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "Flat key=value experiment file");
  app.add_option("--mode", f.mode, "dimension|pressure|lyapunov|stability|entropy|checks");
  app.add_option("--map", f.map, "Map spec, e.g. \"family=cookie_cutter r1=3 r2=3\"");
  app.add_option("--potential", f.potential, "zero|const:c|cos:a|geometric:t|upper:t|lower:t");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--seed", f.seed, "First base seed");
  app.add_option("--seeds", f.seeds, "Number of base samples");
  app.add_option("--depth", f.depth, "Word length budget");
  app.add_option("--tol", f.tol, "Tolerance");
  app.add_option("--eps-schedule", f.eps_schedule, "Comma-separated perturbation sizes");
  app.add_option("--workers", f.workers, "OpenMP threads (0 keeps the runtime default)");
}

pressurelab::ExperimentConfig build_config(const Flags& f) {
  pressurelab::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = pressurelab::load_config(f.config, cfg);
  if (f.mode) cfg.set("mode", *f.mode);
  if (f.map) cfg.set("map", *f.map);
  if (f.potential) cfg.set("potential", *f.potential);
  if (f.out) cfg.set("out", *f.out);
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  if (f.seeds) cfg.set("seeds", std::to_string(*f.seeds));
  if (f.depth) cfg.set("depth", std::to_string(*f.depth));
  if (f.tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *f.tol);
    cfg.set("tol", buf);
  }
  if (f.eps_schedule) cfg.set("eps_schedule", *f.eps_schedule);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pressurelab: pressure, dimension and stability experiments for expanding maps"};
  app.require_subcommand(1);
  Flags run_flags, verify_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and write its outputs");
  add_common(*run_cmd, run_flags);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant suite; nonzero exit on any failure");
  add_common(*verify_cmd, verify_flags);
  CLI11_PARSE(app, argc, argv);

  const Flags& flags = run_cmd->parsed() ? run_flags : verify_flags;
  if (flags.workers > 0) omp_set_num_threads(flags.workers);

  try {
    pressurelab::ExperimentConfig cfg = build_config(flags);
    if (verify_cmd->parsed()) cfg.mode = pressurelab::Mode::checks;
    const pressurelab::RunRecord rec = pressurelab::run(cfg);
    for (const auto& [k, v] : rec.summary) std::cout << k << " = " << v << "\n";
    for (const auto& e : rec.errors) std::cerr << "error: " << e << "\n";
    std::cout << "outputs written to " << cfg.out << "\n";
    return rec.ok() ? 0 : 1;
  } catch (const pressurelab::LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
