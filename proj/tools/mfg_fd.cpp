// mfg-fd: solve, study and verify the finite difference mean field game scheme.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mfg/archive.hpp"
#include "mfg/config.hpp"
#include "mfg/dynamics.hpp"
#include "mfg/grid_io.hpp"
#include "mfg/lemmas.hpp"
#include "mfg/presets.hpp"
#include "mfg/random.hpp"
#include "mfg/study.hpp"
#include "mfg/verification.hpp"

namespace {

enum Exit : int {
  ok = 0,
  config_error = 1,
  non_convergence = 2,
  verify_failure = 3,
  not_decreasing = 4,
};

int thread_count(int flag) {
  if (const char* env = std::getenv("MFG_FD_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw mfg::ConfigError(std::string("MFG_FD_THREADS: not an integer: ") + env);
    }
  }
  return std::max(1, flag);
}

int cmd_solve(const std::string& config_path, const std::string& out_flag) {
  const mfg::RunConfig cfg = mfg::load_config(config_path);
  const std::string out = out_flag.empty() ? cfg.output_dir : out_flag;
  if (cfg.problem.kind == "ergodic") {
    const mfg::ErgodicSolution s = mfg::run_ergodic(mfg::make_ergodic(cfg), cfg.solver);
    mfg::write_ergodic_archive(out, cfg, s);
    std::printf("ergodic N_h=%d: %s outer_iters=%d change=%.3e hjb_res=%.3e fp_res=%.3e lambda=%.17g\n",
                cfg.problem.N_h, s.converged ? "converged" : "NOT converged", s.outer_iters,
                s.last_change, s.hjb_residual, s.fp_residual, s.lambda);
    if (!s.converged) {
      std::fprintf(stderr, "error: %s\n", s.failure.c_str());
      return non_convergence;
    }
    return ok;
  }
  const mfg::EvolutiveProblem p = mfg::make_evolutive(cfg);
  const mfg::EvolutiveSolution s = mfg::run_evolutive(p, cfg.solver);
  mfg::write_evolutive_archive(out, cfg, p, s);
  std::printf("evolutive N_h=%d N_T=%d: %s outer_iters=%d change=%.3e hjb_res=%.3e fp_res=%.3e\n",
              cfg.problem.N_h, cfg.problem.N_T, s.converged ? "converged" : "NOT converged",
              s.outer_iters, s.last_change, s.hjb_residual, s.fp_residual);
  if (!s.converged) {
    std::fprintf(stderr, "error: %s\n", s.failure.c_str());
    return non_convergence;
  }
  return ok;
}

int cmd_study(const std::string& config_path, const std::string& out_flag, int threads) {
  const mfg::RunConfig cfg = mfg::load_config(config_path);
  const std::string out = out_flag.empty() ? cfg.output_dir : out_flag;
  const mfg::StudyReport r = mfg::convergence_study(cfg, threads);
  mfg::write_study(out, cfg, r);
  std::printf("%6s %6s %12s %12s %12s %8s %8s %8s%s\n", "N_h", "N_T", "err_u_sup", "err_u_w1b",
              "err_m", "ord_sup", "ord_w1b", "ord_m", r.kind == "ergodic" ? "  lambda" : "");
  for (const auto& l : r.levels) {
    std::printf("%6d %6d %12.4e %12.4e %12.4e %8.3f %8.3f %8.3f", l.n_side, l.n_steps, l.err_u_sup,
                l.err_u_w1beta, l.err_m, l.order_u_sup, l.order_u_w1beta, l.order_m);
    if (r.kind == "ergodic") std::printf("  %.12f", l.lambda);
    std::printf("%s\n", l.converged ? "" : "  (not converged)");
  }
  if (!r.all_converged) {
    std::fprintf(stderr, "error: a level did not converge\n");
    return non_convergence;
  }
  if (!r.decreasing) {
    std::fprintf(stderr, "errors are not strictly decreasing\n");
    return not_decreasing;
  }
  return ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int samples,
               const std::vector<double>& betas, const std::string& out) {
  const bool all = suite == "all";
  nlohmann::json report;
  bool pass = true;
  const auto fail_line = [&](const std::string& what) {
    pass = false;
    std::fprintf(stderr, "FAIL %s\n", what.c_str());
  };

  if (all || suite == "lemmas") {
    for (double beta : betas) {
      const mfg::LemmaReport r = mfg::lemma_suite(beta, static_cast<std::size_t>(samples), seed);
      report["lemmas"].push_back(mfg::to_json(r));
      for (const auto& x : r.results) {
        std::printf("lemmas beta=%g %-16s worst_margin=% .3e %s\n", beta, x.lemma_id.c_str(),
                    x.worst_margin, x.pass ? "pass" : "FAIL");
        if (!x.pass)
          fail_line("lemma " + x.lemma_id + " at beta=" + mfg::format_exact(beta) +
                    ", worst sample: " + x.worst_sample);
      }
    }
  }
  if (all || suite == "identity") {
    const std::vector<std::pair<std::string, mfg::CostOperator>> costs{
        {"bilaplacian", mfg::CostOperator::bilaplacian()},
        {"local power alpha=2", mfg::CostOperator::local(mfg::LocalCost::power(2.0))}};
    for (double beta : betas)
      for (const auto& [name, cost] : costs) {
        const mfg::IdentityReport r = mfg::identity_suite(beta, samples, seed, cost);
        auto j = mfg::to_json(r);
        j["cost"] = name;
        report["identity"].push_back(j);
        std::printf("identity beta=%g cost=%s worst_gap=%.3e worst_middle=% .3e %s\n", beta,
                    name.c_str(), r.worst_relative_gap, r.worst_middle_term,
                    r.pass ? "pass" : "FAIL");
        if (!r.pass)
          fail_line("identity at beta=" + mfg::format_exact(beta) + " cost=" + name +
                    ", worst sample: " + std::to_string(r.worst_sample));
      }
  }
  if (all || suite == "adjoint") {
    const int probes = std::max(1, samples / 10);
    for (double beta : betas)
      for (int n : {4, 8, 16}) {
        const mfg::TorusGrid g(n);
        mfg::CounterRng rng(seed, 0xad0000ULL + static_cast<std::uint64_t>(n));
        mfg::GridField calh(g), u(g);
        for (double& v : calh.values()) v = rng.uniform(-1.0, 1.0);
        for (double& v : u.values()) v = rng.uniform(-1.0, 1.0);
        const mfg::PowerHamiltonian H(beta, calh);
        const mfg::AdjointCheck a = mfg::adjoint_check(H, 0.7, u, probes, seed);
        const bool good = a.max_relative <= 1e-12;
        report["adjoint"].push_back({{"beta", beta},
                                     {"N_h", n},
                                     {"probes", probes},
                                     {"max_discrepancy", a.max_discrepancy},
                                     {"max_relative", a.max_relative},
                                     {"pass", good}});
        std::printf("adjoint beta=%g N_h=%d max_relative=%.3e %s\n", beta, n, a.max_relative,
                    good ? "pass" : "FAIL");
        if (!good) fail_line("adjoint at beta=" + mfg::format_exact(beta) + " N_h=" + std::to_string(n));
      }
  }
  report["seed"] = seed;
  report["samples"] = samples;
  report["pass"] = pass;
  std::filesystem::create_directories(out);
  mfg::write_json((std::filesystem::path(out) / ("verify_" + suite + ".json")).string(), report);
  return pass ? ok : verify_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite difference solver for mean field games on the flat torus"};
  app.require_subcommand(1);

  std::string config, out;
  int threads = 1;
  std::uint64_t seed = 7;
  int samples = 1000;
  std::vector<double> betas;
  std::string suite = "all";

  auto* solve = app.add_subcommand("solve", "Solve one evolutive or ergodic problem");
  solve->add_option("--config", config, "INI config, or an archive's meta.json")->required();
  solve->add_option("--out", out, "Archive directory (default: output.dir)");
  solve->add_option("--threads", threads, "Worker threads (unused by a single solve)");

  auto* study = app.add_subcommand("study", "Grid refinement study over study.levels");
  study->add_option("--config", config, "INI config")->required();
  study->add_option("--out", out, "Report directory (default: output.dir)");
  study->add_option("--threads", threads, "Levels solved concurrently");

  auto* verify = app.add_subcommand("verify", "Sampled inequality, identity and adjoint checks");
  verify->add_option("suite", suite, "lemmas | identity | adjoint | all")
      ->check(CLI::IsMember({"lemmas", "identity", "adjoint", "all"}));
  verify->add_option("--seed", seed, "Seed of the counter-based generator");
  verify->add_option("--samples", samples, "Samples per check")->check(CLI::PositiveNumber);
  verify->add_option("--beta", betas, "Exponents to check (default 1.5 2 3)");
  verify->add_option("--out", out, "Report directory (default: verify_out)");
  verify->add_option("--threads", threads, "Unused; suites are sequential");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*solve) return cmd_solve(config, out);
    if (*study) return cmd_study(config, out, thread_count(threads));
    if (betas.empty()) betas = {1.5, 2.0, 3.0};
    for (double b : betas)
      if (!(b > 1.0)) throw mfg::ConfigError("--beta: beta must be > 1");
    return cmd_verify(suite, seed, samples, betas, out.empty() ? "verify_out" : out);
  } catch (const mfg::UsageError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const mfg::NonConvergence& e) {
    std::fprintf(stderr, "non-convergence: %s\n", e.what());
    return non_convergence;
  } catch (const mfg::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return non_convergence;
  }
}
