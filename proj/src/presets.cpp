#include "mfg/presets.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mfg/grid_io.hpp"

namespace mfg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string resolve(const RunConfig& cfg, const std::string& file) {
  const std::filesystem::path p(file);
  if (p.is_absolute() || cfg.base_dir.empty()) return file;
  return (std::filesystem::path(cfg.base_dir) / p).string();
}

GridField read_preset_file(const RunConfig& cfg, const std::string& key, const std::string& file,
                           const TorusGrid& grid) {
  try {
    return read_field_csv(resolve(cfg, file), grid.n_side());
  } catch (const UsageError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

GridField hamiltonian_preset(const RunConfig& cfg, const TorusGrid& grid) {
  const auto& p = cfg.problem;
  if (p.hamiltonian == "zero") return GridField(grid);
  if (p.hamiltonian == "sines") {
    const double a = p.amplitude;
    return sample_nodes(
        [a](double x1, double x2) { return a * std::sin(two_pi * x1) * std::sin(two_pi * x2); },
        grid);
  }
  if (p.hamiltonian == "file")
    return read_preset_file(cfg, "problem.hamiltonian_file", p.hamiltonian_file, grid);
  throw ConfigError("problem.hamiltonian: unknown preset '" + p.hamiltonian + "'");
}

GridField u0_preset(const RunConfig& cfg, const TorusGrid& grid) {
  const auto& p = cfg.problem;
  if (p.u0 == "zero") return GridField(grid);
  if (p.u0 == "cosine")
    return sample_nodes(
        [](double x1, double x2) { return 0.5 * (std::cos(two_pi * x1) + std::cos(two_pi * x2)); },
        grid);
  if (p.u0 == "file") return read_preset_file(cfg, "problem.u0_file", p.u0_file, grid);
  throw ConfigError("problem.u0: unknown preset '" + p.u0 + "'");
}

DiscreteDensity mT_preset(const RunConfig& cfg, const TorusGrid& grid) {
  const auto& p = cfg.problem;
  if (p.mT == "uniform") return DiscreteDensity(GridField(grid, 1.0));
  if (p.mT == "bump") {
    const double k = p.bump_kappa;
    const GridField avg = cell_average(
        [k](double x1, double x2) {
          return std::exp(k * (std::cos(two_pi * (x1 - 0.5)) + std::cos(two_pi * (x2 - 0.5))));
        },
        grid);
    return DiscreteDensity(normalize_density(avg));
  }
  if (p.mT == "file") {
    GridField m = read_preset_file(cfg, "problem.mT_file", p.mT_file, grid);
    if (m.min() < 0.0) throw ConfigError("problem.mT_file: negative density entry");
    if (std::abs(m.mass() - 1.0) > 1e-9)
      throw ConfigError("problem.mT_file: mass " + format_exact(m.mass()) + " is not 1");
    return DiscreteDensity(normalize_density(std::move(m)));
  }
  throw ConfigError("problem.mT: unknown preset '" + p.mT + "'");
}

PowerHamiltonian make_hamiltonian(const RunConfig& cfg, const TorusGrid& grid) {
  std::optional<double> bound;
  if (cfg.problem.hamiltonian == "zero") bound = 0.0;
  if (cfg.problem.hamiltonian == "sines") bound = two_pi * std::abs(cfg.problem.amplitude);
  return PowerHamiltonian(cfg.problem.beta, hamiltonian_preset(cfg, grid), bound);
}

EvolutiveProblem make_evolutive(const RunConfig& cfg, int n_side, int n_steps) {
  const TorusGrid grid(n_side);
  EvolutiveProblem p{cfg.problem.nu,        make_hamiltonian(cfg, grid),
                     make_cost(cfg.cost),   u0_preset(cfg, grid),
                     mT_preset(cfg, grid),  TimeMesh(cfg.problem.T, n_steps)};
  p.validate();
  return p;
}

EvolutiveProblem make_evolutive(const RunConfig& cfg) {
  return make_evolutive(cfg, cfg.problem.N_h, cfg.problem.N_T);
}

ErgodicProblem make_ergodic(const RunConfig& cfg, int n_side) {
  const TorusGrid grid(n_side);
  ErgodicProblem p{cfg.problem.nu, make_hamiltonian(cfg, grid), make_cost(cfg.cost)};
  p.validate();
  return p;
}

ErgodicProblem make_ergodic(const RunConfig& cfg) { return make_ergodic(cfg, cfg.problem.N_h); }

namespace presets {

RunConfig uniform() { return RunConfig{}; }

RunConfig smooth_nonlocal() {
  RunConfig c;
  c.problem.nu = 0.6;
  c.problem.beta = 2.0;
  c.problem.T = 1.0;
  c.problem.N_h = 16;
  c.problem.N_T = 32;
  c.problem.hamiltonian = "sines";
  c.problem.amplitude = 1.0;
  c.problem.u0 = "cosine";
  c.problem.mT = "bump";
  c.cost.kind = "bilaplacian";
  return c;
}

RunConfig local_power(double alpha) {
  RunConfig c = smooth_nonlocal();
  c.cost.kind = "local";
  c.cost.preset = "power";
  c.cost.alpha = alpha;
  return c;
}

RunConfig ergodic_zero() {
  RunConfig c;
  c.problem.kind = "ergodic";
  return c;
}

RunConfig ergodic_sines() {
  RunConfig c;
  c.problem.kind = "ergodic";
  c.problem.hamiltonian = "sines";
  c.problem.amplitude = 1.0;
  c.cost.preset = "power";
  c.cost.alpha = 2.0;
  return c;
}

}  // namespace presets

}  // namespace mfg
