#include "mfg/config.hpp"
#include "mfg/grid_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace mfg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const FlatConfig& flat, const std::string& key, const std::string& msg) {
  std::string where = flat.source;
  const auto it = flat.lines.find(key);
  if (it != flat.lines.end() && it->second > 0) where += ":" + std::to_string(it->second);
  throw ConfigError(where + ": " + key + ": " + msg);
}

double parse_double(const FlatConfig& flat, const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(flat, key, "expected a number, got '" + text + "'");
  return v;
}

int parse_int(const FlatConfig& flat, const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(flat, key, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<int> parse_int_list(const FlatConfig& flat, const std::string& key,
                                const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(flat, key, trim(item)));
  if (out.empty()) fail(flat, key, "empty list");
  return out;
}

void check_choice(const FlatConfig& flat, const std::string& key, const std::string& v,
                  std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (v == a) return;
    list += list.empty() ? a : std::string(" | ") + a;
  }
  fail(flat, key, "unknown value '" + v + "' (expected " + list + ")");
}

std::string format_ints(const std::vector<int>& xs) {
  std::string s;
  for (int x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

}  // namespace

FlatConfig parse_ini_text(const std::string& text, const std::string& source) {
  namespace pt = boost::property_tree;
  FlatConfig flat;
  flat.source = source;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      flat.values[section] = trim(body.data());
      continue;
    }
    for (const auto& [key, leaf] : body) flat.values[section + "." + key] = trim(leaf.data());
  }
  // Recover line numbers for diagnostics.
  std::istringstream lines(text);
  std::string line, section;
  for (int no = 1; std::getline(lines, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(t.substr(0, eq));
    flat.lines[section.empty() ? key : section + "." + key] = no;
  }
  return flat;
}

FlatConfig read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  if (std::filesystem::path(path).extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!doc.contains("config")) throw ConfigError(path + ": no 'config' echo in this document");
    return flatten_json(doc["config"], path);
  }
  return parse_ini_text(buf.str(), path);
}

FlatConfig flatten_json(const nlohmann::json& echo, const std::string& source) {
  FlatConfig flat;
  flat.source = source;
  if (!echo.is_object()) throw ConfigError(source + ": config echo is not an object");
  for (const auto& [section, body] : echo.items()) {
    if (!body.is_object()) throw ConfigError(source + ": section '" + section + "' is not an object");
    for (const auto& [key, v] : body.items()) {
      std::string text;
      if (v.is_string()) {
        text = v.get<std::string>();
      } else if (v.is_array()) {
        for (const auto& x : v) text += (text.empty() ? "" : ",") + x.dump();
      } else {
        text = v.dump();
      }
      flat.values[section + "." + key] = text;
    }
  }
  return flat;
}

RunConfig config_from_flat(const FlatConfig& flat) {
  RunConfig c;
  auto& p = c.problem;
  auto& s = c.solver;
  using Setter = std::function<void(const std::string& key, const std::string& v)>;
  const auto num = [&](double& dst) {
    return Setter([&flat, &dst](const std::string& k, const std::string& v) {
      dst = parse_double(flat, k, v);
    });
  };
  const auto integer = [&](int& dst) {
    return Setter([&flat, &dst](const std::string& k, const std::string& v) {
      dst = parse_int(flat, k, v);
    });
  };
  const auto text = [](std::string& dst) {
    return Setter([&dst](const std::string&, const std::string& v) { dst = v; });
  };
  const std::map<std::string, Setter> setters{
      {"problem.kind", text(p.kind)},
      {"problem.nu", num(p.nu)},
      {"problem.beta", num(p.beta)},
      {"problem.T", num(p.T)},
      {"problem.N_h", integer(p.N_h)},
      {"problem.N_T", integer(p.N_T)},
      {"problem.hamiltonian", text(p.hamiltonian)},
      {"problem.amplitude", num(p.amplitude)},
      {"problem.hamiltonian_file", text(p.hamiltonian_file)},
      {"problem.u0", text(p.u0)},
      {"problem.u0_file", text(p.u0_file)},
      {"problem.mT", text(p.mT)},
      {"problem.mT_file", text(p.mT_file)},
      {"problem.bump_kappa", num(p.bump_kappa)},
      {"cost.kind", text(c.cost.kind)},
      {"cost.preset", text(c.cost.preset)},
      {"cost.alpha", num(c.cost.alpha)},
      {"solver.damping", num(s.fixed_point.damping)},
      {"solver.outer_tol", num(s.fixed_point.outer_tol)},
      {"solver.max_outer", integer(s.fixed_point.max_outer)},
      {"solver.max_halvings", integer(s.fixed_point.max_halvings)},
      {"solver.residual_tol", num(s.fixed_point.residual_tol)},
      {"solver.newton_tol", num(s.hjb.newton_tol)},
      {"solver.max_newton", integer(s.hjb.max_newton)},
      {"solver.armijo_c", num(s.hjb.armijo_c)},
      {"solver.min_step", num(s.hjb.min_step)},
      {"solver.linear_method", text(s.linear.method)},
      {"solver.linear_residual_tol", num(s.linear.residual_tol)},
      {"study.levels",
       [&](const std::string& k, const std::string& v) { c.study.levels = parse_int_list(flat, k, v); }},
      {"study.nt_ratio", integer(c.study.nt_ratio)},
      {"output.dir", text(c.output_dir)},
  };
  for (const auto& [key, value] : flat.values) {
    const auto it = setters.find(key);
    if (it == setters.end()) fail(flat, key, "unknown key");
    it->second(key, value);
  }
  const auto parent = std::filesystem::path(flat.source).parent_path();
  c.base_dir = parent.empty() ? "." : parent.string();

  // Range checks, reported against the offending key.
  check_choice(flat, "problem.kind", p.kind, {"evolutive", "ergodic"});
  if (!(p.nu > 0.0)) fail(flat, "problem.nu", "nu must be > 0");
  if (!(p.beta > 1.0))
    fail(flat, "problem.beta", "beta must be > 1 (got " + format_exact(p.beta) + ")");
  if (!(p.T > 0.0)) fail(flat, "problem.T", "T must be > 0");
  if (p.N_h < 2) fail(flat, "problem.N_h", "N_h must be at least 2");
  if (p.N_T < 1) fail(flat, "problem.N_T", "N_T must be at least 1");
  check_choice(flat, "problem.hamiltonian", p.hamiltonian, {"zero", "sines", "file"});
  check_choice(flat, "problem.u0", p.u0, {"zero", "cosine", "file"});
  check_choice(flat, "problem.mT", p.mT, {"uniform", "bump", "file"});
  if (p.hamiltonian == "file" && p.hamiltonian_file.empty())
    fail(flat, "problem.hamiltonian_file", "required when problem.hamiltonian = file");
  if (p.u0 == "file" && p.u0_file.empty())
    fail(flat, "problem.u0_file", "required when problem.u0 = file");
  if (p.mT == "file" && p.mT_file.empty())
    fail(flat, "problem.mT_file", "required when problem.mT = file");
  if (!(p.bump_kappa > 0.0)) fail(flat, "problem.bump_kappa", "must be > 0");
  check_choice(flat, "cost.kind", c.cost.kind, {"local", "bilaplacian"});
  check_choice(flat, "cost.preset", c.cost.preset, {"linear", "power"});
  if (c.cost.preset == "power" && !(c.cost.alpha > 0.0 && c.cost.alpha <= 2.0))
    fail(flat, "cost.alpha", "alpha must lie in (0, 2]");
  if (p.kind == "ergodic" && c.cost.kind != "local")
    fail(flat, "cost.kind", "ergodic problems need a local cost");
  const auto& fp = s.fixed_point;
  if (!(fp.damping > 0.0 && fp.damping <= 1.0))
    fail(flat, "solver.damping", "damping must lie in (0, 1]");
  if (!(fp.outer_tol > 0.0)) fail(flat, "solver.outer_tol", "must be > 0");
  if (fp.max_outer < 1) fail(flat, "solver.max_outer", "must be >= 1");
  if (fp.max_halvings < 0) fail(flat, "solver.max_halvings", "must be >= 0");
  if (!(fp.residual_tol > 0.0)) fail(flat, "solver.residual_tol", "must be > 0");
  if (!(s.hjb.newton_tol > 0.0)) fail(flat, "solver.newton_tol", "must be > 0");
  if (s.hjb.max_newton < 1) fail(flat, "solver.max_newton", "must be >= 1");
  if (!(s.hjb.armijo_c > 0.0 && s.hjb.armijo_c < 1.0))
    fail(flat, "solver.armijo_c", "must lie in (0, 1)");
  if (!(s.hjb.min_step > 0.0 && s.hjb.min_step <= 1.0))
    fail(flat, "solver.min_step", "must lie in (0, 1]");
  check_choice(flat, "solver.linear_method", s.linear.method, {"sparse_lu"});
  if (!(s.linear.residual_tol > 0.0)) fail(flat, "solver.linear_residual_tol", "must be > 0");
  try {
    validate_levels(c.study);
  } catch (const ConfigError& e) {
    fail(flat, "study.levels", e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) { return config_from_flat(read_flat_config(path)); }

void validate_levels(const StudyConfig& study) {
  if (study.levels.size() < 2) throw ConfigError("a study needs at least two levels");
  if (study.nt_ratio < 1) throw ConfigError("study.nt_ratio must be >= 1");
  for (std::size_t k = 0; k < study.levels.size(); ++k) {
    if (study.levels[k] < 2) throw ConfigError("every level needs N_h >= 2");
    if (k == 0) continue;
    const int a = study.levels[k - 1], b = study.levels[k];
    if (b <= a || b % a != 0)
      throw ConfigError("levels " + format_ints(study.levels) + " are not nested: " +
                        std::to_string(b) + " is not a proper multiple of " + std::to_string(a));
  }
}

void validate(const RunConfig& cfg) { config_from_flat(flatten_json(to_json(cfg), "<config>")); }

nlohmann::json to_json(const RunConfig& c) {
  const auto& p = c.problem;
  const auto& s = c.solver;
  nlohmann::json j;
  j["problem"] = {{"kind", p.kind},
                  {"nu", p.nu},
                  {"beta", p.beta},
                  {"T", p.T},
                  {"N_h", p.N_h},
                  {"N_T", p.N_T},
                  {"hamiltonian", p.hamiltonian},
                  {"amplitude", p.amplitude},
                  {"u0", p.u0},
                  {"mT", p.mT},
                  {"bump_kappa", p.bump_kappa}};
  const auto resolve = [&](const std::string& f) {
    const std::filesystem::path path(f);
    return path.is_absolute() ? f : (std::filesystem::path(c.base_dir) / path).lexically_normal().string();
  };
  if (!p.hamiltonian_file.empty()) j["problem"]["hamiltonian_file"] = resolve(p.hamiltonian_file);
  if (!p.u0_file.empty()) j["problem"]["u0_file"] = resolve(p.u0_file);
  if (!p.mT_file.empty()) j["problem"]["mT_file"] = resolve(p.mT_file);
  j["cost"] = {{"kind", c.cost.kind}, {"preset", c.cost.preset}, {"alpha", c.cost.alpha}};
  j["solver"] = {{"damping", s.fixed_point.damping},
                 {"outer_tol", s.fixed_point.outer_tol},
                 {"max_outer", s.fixed_point.max_outer},
                 {"max_halvings", s.fixed_point.max_halvings},
                 {"residual_tol", s.fixed_point.residual_tol},
                 {"newton_tol", s.hjb.newton_tol},
                 {"max_newton", s.hjb.max_newton},
                 {"armijo_c", s.hjb.armijo_c},
                 {"min_step", s.hjb.min_step},
                 {"linear_method", s.linear.method},
                 {"linear_residual_tol", s.linear.residual_tol}};
  j["study"] = {{"levels", c.study.levels}, {"nt_ratio", c.study.nt_ratio}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

CostOperator make_cost(const CostConfig& cfg) {
  if (cfg.kind == "bilaplacian") return CostOperator::bilaplacian();
  if (cfg.kind != "local") throw ConfigError("cost.kind: unknown value '" + cfg.kind + "'");
  if (cfg.preset == "linear") return CostOperator::local(LocalCost::linear());
  if (cfg.preset == "power") return CostOperator::local(LocalCost::power(cfg.alpha));
  throw ConfigError("cost.preset: unknown value '" + cfg.preset + "'");
}

}  // namespace mfg
