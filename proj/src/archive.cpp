#include "mfg/archive.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mfg/grid_io.hpp"

namespace mfg {

namespace {

std::string slice_name(const char* prefix, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_slice_%04d.csv", prefix, n);
  return buf;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
}

}  // namespace

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json to_json(const AprioriMonitors& m) {
  return {{"lower_bound_u", m.lower_bound_u},
          {"energy_grad_term", m.energy_grad_term},
          {"energy_cost_term", m.energy_cost_term},
          {"max_l1_u", m.max_l1_u},
          {"Un_path", m.Un_path},
          {"Un_total_variation", m.Un_total_variation}};
}

nlohmann::json to_json(const StudyReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    nlohmann::json j{{"N_h", l.n_side},
                     {"N_T", l.n_steps},
                     {"h", l.h},
                     {"dt", l.dt},
                     {"err_u_sup", number_or_null(l.err_u_sup)},
                     {"err_u_w1beta", number_or_null(l.err_u_w1beta)},
                     {"err_m", number_or_null(l.err_m)},
                     {"order_u_sup", number_or_null(l.order_u_sup)},
                     {"order_u_w1beta", number_or_null(l.order_u_w1beta)},
                     {"order_m", number_or_null(l.order_m)},
                     {"converged", l.converged},
                     {"outer_iters", l.outer_iters}};
    if (r.kind == "ergodic") j["lambda"] = l.lambda;
    if (l.monitors) j["monitors"] = to_json(*l.monitors);
    levels.push_back(j);
  }
  nlohmann::json j{{"kind", r.kind},
                   {"beta", r.beta},
                   {"m_norm_exponent", r.m_exponent},
                   {"converged_floor", r.floor},
                   {"levels", levels},
                   {"all_converged", r.all_converged},
                   {"decreasing", r.decreasing}};
  if (r.kind == "ergodic") j["lambda_increments"] = r.lambda_increments;
  return j;
}

nlohmann::json to_json(const LemmaReport& r) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& x : r.results)
    results.push_back({{"lemma", x.lemma_id},
                       {"samples", x.samples},
                       {"worst_margin", x.worst_margin},
                       {"calibrated_constants", x.calibrated_constants},
                       {"worst_sample", x.worst_sample},
                       {"pass", x.pass}});
  return {{"beta", r.beta},
          {"seed", r.seed},
          {"tolerance", r.tolerance},
          {"pass", r.pass()},
          {"results", results}};
}

nlohmann::json to_json(const IdentityReport& r) {
  return {{"beta", r.beta},
          {"samples", r.samples},
          {"worst_relative_gap", r.worst_relative_gap},
          {"worst_middle_term", r.worst_middle_term},
          {"worst_sample", r.worst_sample},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

void write_evolutive_archive(const std::string& dir, const RunConfig& cfg,
                             const EvolutiveProblem& p, const EvolutiveSolution& s) {
  make_dir(dir);
  const auto& g = p.grid();
  nlohmann::json meta{{"kind", "evolutive"},
                      {"config", to_json(cfg)},
                      {"N_h", g.n_side()},
                      {"N_T", p.mesh.n_steps},
                      {"h", g.h()},
                      {"dt", p.mesh.dt},
                      {"cost", p.cost.describe()},
                      {"converged", s.converged},
                      {"partial", !s.converged},
                      {"outer_iters", s.outer_iters},
                      {"last_change", s.last_change},
                      {"residual_history", s.residual_history},
                      {"hjb_residual", s.hjb_residual},
                      {"fp_residual", s.fp_residual},
                      {"max_mass_deviation", s.max_mass_deviation},
                      {"max_clamp", s.max_clamp},
                      {"picard_fallbacks", s.picard_fallbacks},
                      {"comparison_lower_bound", comparison_lower_bound(p, s)}};
  double min_u = s.u[0].min(), min_m = s.m[0].min();
  for (int n = 0; n <= p.mesh.n_steps; ++n) {
    min_u = std::min(min_u, s.u[n].min());
    min_m = std::min(min_m, s.m[n].min());
  }
  meta["min_u"] = min_u;
  meta["min_m"] = min_m;
  if (!s.failure.empty()) meta["failure"] = s.failure;
  if (s.monitors) meta["monitors"] = to_json(*s.monitors);
  for (int n = 0; n <= p.mesh.n_steps; ++n) {
    write_field_csv((std::filesystem::path(dir) / slice_name("u", n)).string(), s.u[n]);
    write_field_csv((std::filesystem::path(dir) / slice_name("m", n)).string(), s.m[n]);
  }
  write_json((std::filesystem::path(dir) / "meta.json").string(), meta);
}

void write_ergodic_archive(const std::string& dir, const RunConfig& cfg, const ErgodicSolution& s) {
  make_dir(dir);
  const auto& g = s.u.grid();
  nlohmann::json meta{{"kind", "ergodic"},
                      {"config", to_json(cfg)},
                      {"N_h", g.n_side()},
                      {"h", g.h()},
                      {"lambda", s.lambda},
                      {"converged", s.converged},
                      {"partial", !s.converged},
                      {"outer_iters", s.outer_iters},
                      {"last_change", s.last_change},
                      {"residual_history", s.residual_history},
                      {"hjb_residual", s.hjb_residual},
                      {"fp_residual", s.fp_residual},
                      {"mass_residual", s.mass_residual},
                      {"mean_residual", s.mean_residual}};
  if (!s.failure.empty()) meta["failure"] = s.failure;
  write_field_csv((std::filesystem::path(dir) / "u.csv").string(), s.u);
  write_field_csv((std::filesystem::path(dir) / "m.csv").string(), s.m);
  write_json((std::filesystem::path(dir) / "meta.json").string(), meta);
}

void write_study(const std::string& dir, const RunConfig& cfg, const StudyReport& r) {
  make_dir(dir);
  nlohmann::json j = to_json(r);
  j["config"] = to_json(cfg);
  write_json((std::filesystem::path(dir) / "study.json").string(), j);
  std::ofstream csv(std::filesystem::path(dir) / "study.csv");
  if (!csv) throw UsageError("cannot write study.csv in " + dir);
  csv << "level,h,dt,err_u_sup,err_u_w1beta,err_m,order,order_u_sup,order_u_w1beta,order_m\n";
  const auto cell = [](double v) { return std::isfinite(v) ? format_exact(v) : std::string(); };
  for (const auto& l : r.levels) {
    // `order` is the smallest of the three observed orders.
    double order = std::fmin(l.order_u_sup, std::fmin(l.order_u_w1beta, l.order_m));
    if (!std::isfinite(l.order_u_sup) || !std::isfinite(l.order_u_w1beta) ||
        !std::isfinite(l.order_m))
      order = std::numeric_limits<double>::quiet_NaN();
    csv << l.n_side << ',' << cell(l.h) << ',' << cell(l.dt) << ',' << cell(l.err_u_sup) << ','
        << cell(l.err_u_w1beta) << ',' << cell(l.err_m) << ',' << cell(order) << ','
        << cell(l.order_u_sup) << ',' << cell(l.order_u_w1beta) << ',' << cell(l.order_m) << '\n';
  }
}

}  // namespace mfg
