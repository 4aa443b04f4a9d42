#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mfg/config.hpp"
#include "mfg/lemmas.hpp"
#include "mfg/solver.hpp"
#include "mfg/study.hpp"
#include "mfg/verification.hpp"

namespace mfg {

nlohmann::json to_json(const AprioriMonitors& m);
nlohmann::json to_json(const StudyReport& r);
nlohmann::json to_json(const LemmaReport& r);
nlohmann::json to_json(const IdentityReport& r);

/// meta.json plus u_slice_####.csv / m_slice_####.csv. A failed solve is written with
/// "partial": true.
void write_evolutive_archive(const std::string& dir, const RunConfig& cfg,
                             const EvolutiveProblem& p, const EvolutiveSolution& s);
/// meta.json (with lambda) plus u.csv / m.csv.
void write_ergodic_archive(const std::string& dir, const RunConfig& cfg, const ErgodicSolution& s);
/// study.json and study.csv.
void write_study(const std::string& dir, const RunConfig& cfg, const StudyReport& r);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace mfg
