#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Bad or inconsistent configuration. The message names the source, line (when known) and key.
class ConfigError : public UsageError {
public:
  using UsageError::UsageError;
};

struct CostConfig {
  std::string kind = "local";     // local | bilaplacian
  std::string preset = "linear";  // local only: linear | power
  double alpha = 1.0;             // power exponent
};

struct ProblemConfig {
  std::string kind = "evolutive";  // evolutive | ergodic
  double nu = 1.0;
  double beta = 2.0;
  double T = 1.0;
  int N_h = 16;
  int N_T = 32;
  std::string hamiltonian = "zero";  // zero | sines | file
  double amplitude = 1.0;
  std::string hamiltonian_file;
  std::string u0 = "zero";  // zero | cosine | file
  std::string u0_file;
  std::string mT = "uniform";  // uniform | bump | file
  std::string mT_file;
  double bump_kappa = 1.0;
};

struct StudyConfig {
  std::vector<int> levels{8, 16, 32};
  int nt_ratio = 2;  // N_T = nt_ratio * N_h at every level
};

struct RunConfig {
  ProblemConfig problem;
  CostConfig cost;
  SolverOptions solver;
  StudyConfig study;
  std::string output_dir = "out";
  std::string base_dir;  // directory that relative file paths are resolved against
};

/// Flat "section.key" -> text view of a config, with the line each key came from (0 if none).
struct FlatConfig {
  std::string source;
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
};

FlatConfig parse_ini_text(const std::string& text, const std::string& source);
/// Accepts an INI file, or a JSON document holding the echo under "config" (an archive's meta.json).
FlatConfig read_flat_config(const std::string& path);

/// Builds and validates; unknown keys and out-of-range values throw ConfigError.
RunConfig config_from_flat(const FlatConfig& flat);
RunConfig load_config(const std::string& path);

/// Throws ConfigError unless every field is in range and the study levels are nested.
void validate(const RunConfig& cfg);
void validate_levels(const StudyConfig& study);

/// Echo as nested JSON, numbers written to round-trip exactly.
nlohmann::json to_json(const RunConfig& cfg);
FlatConfig flatten_json(const nlohmann::json& echo, const std::string& source);

CostOperator make_cost(const CostConfig& cfg);

}  // namespace mfg
