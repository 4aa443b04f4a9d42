#include <doctest.h>

#include <cmath>

#include "mfg/presets.hpp"
#include "mfg/study.hpp"

using namespace mfg;

TEST_SUITE("study") {
  TEST_CASE("strict decrease with a floor") {
    CHECK(strictly_decreasing({3.0, 2.0, 1.0}, 1e-8));
    CHECK_FALSE(strictly_decreasing({3.0, 3.0}, 1e-8));
    CHECK_FALSE(strictly_decreasing({1.0, 2.0}, 1e-8));
    CHECK(strictly_decreasing({1e-12, 2e-12}, 1e-8));
    CHECK(strictly_decreasing({1.0, 1e-12, 2e-12}, 1e-8));
    CHECK_FALSE(strictly_decreasing({1e-12, 1.0}, 1e-8));
  }

  TEST_CASE("uniform preset: every level is exact") {
    RunConfig c = presets::uniform();
    c.study.levels = {4, 8, 16};
    const StudyReport r = convergence_study(c, 2);
    CHECK(r.all_converged);
    CHECK(r.decreasing);
    REQUIRE(r.levels.size() == 3);
    for (std::size_t k = 0; k + 1 < r.levels.size(); ++k) {
      CHECK(r.levels[k].err_u_sup <= 1e-8);
      CHECK(r.levels[k].err_m <= 1e-8);
      CHECK(r.levels[k].n_steps == 2 * r.levels[k].n_side);
    }
    CHECK(std::isnan(r.levels.back().err_u_sup));
  }

  TEST_CASE("thread count does not change the report") {
    RunConfig c = presets::ergodic_sines();
    c.study.levels = {4, 8, 16};
    const StudyReport a = convergence_study(c, 1), b = convergence_study(c, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.levels[k].lambda == b.levels[k].lambda);
      if (k < 2) CHECK(a.levels[k].err_u_sup == b.levels[k].err_u_sup);
    }
    REQUIRE(a.lambda_increments.size() == 2);
    CHECK(a.lambda_increments[1] < a.lambda_increments[0]);
  }
}
