#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mfg {

/// Outcome of sampling one inequality. Margins are (lhs - rhs) / scale, where scale
/// is the magnitude of the compared quantities and the terms they are built from;
/// a check passes when every margin is >= -tolerance.
struct LemmaResult {
  std::string lemma_id;
  std::size_t samples = 0;
  double worst_margin = 0.0;
  std::map<std::string, double> calibrated_constants;
  std::string worst_sample;
  bool pass = true;
};

struct LemmaReport {
  double beta = 2.0;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;
  std::vector<LemmaResult> results;

  bool pass() const;
  const LemmaResult* find(const std::string& id) const;
};

/// Samples the Hessian bounds, Bregman-gap lower bounds, the Lipschitz-type bound on
/// g_q (with its constant calibrated from the samples), and the functional lower
/// bounds on random space-time fields. Which inequalities run depends on beta.
LemmaReport lemma_suite(double beta, std::size_t sample_count, std::uint64_t seed,
                        double tolerance = 1e-12);

}  // namespace mfg
