#include <doctest.h>

#include "mfg/lemmas.hpp"

using namespace mfg;

TEST_SUITE("lemmas") {
  TEST_CASE("every sampled inequality holds for beta >= 2") {
    for (double beta : {2.0, 3.0}) {
      const LemmaReport r = lemma_suite(beta, 2000, 7);
      CAPTURE(beta);
      for (const char* id : {"hessian_bound_beta_ge2", "gap_dominates_upwind_gap", "gap_weighted_quadratic",
                             "gap_power_beta", "gradient_lipschitz", "gradient_lipschitz_constant",
                             "functional_weighted_quadratic", "functional_power_beta",
                             "functional_full_gradient"}) {
        const LemmaResult* x = r.find(id);
        REQUIRE_MESSAGE(x != nullptr, id);
        CHECK_MESSAGE(x->pass, id, " worst ", x->worst_margin, " at ", x->worst_sample);
        CHECK(x->samples > 0);
      }
      CHECK(r.find("hessian_bound_beta_lt2") == nullptr);
      CHECK(r.find("functional_sub2_chain") == nullptr);
      CHECK(r.pass());
    }
  }

  TEST_CASE("sub-quadratic branch") {
    const LemmaReport r = lemma_suite(1.5, 2000, 7);
    for (const char* id : {"hessian_bound_beta_lt2", "gap_dominates_upwind_gap", "gap_sub2_quadratic",
                           "functional_sub2_chain"}) {
      const LemmaResult* x = r.find(id);
      REQUIRE_MESSAGE(x != nullptr, id);
      CHECK_MESSAGE(x->pass, id, " worst ", x->worst_margin, " at ", x->worst_sample);
    }
    CHECK(r.find("gradient_lipschitz") == nullptr);
    CHECK(r.pass());
  }

  TEST_CASE("calibrated Lipschitz constant") {
    // At beta = 2 the gradient is piecewise linear with slope 2, so the floor c = 1 holds.
    const LemmaReport r2 = lemma_suite(2.0, 4000, 3);
    const LemmaResult* x = r2.find("gradient_lipschitz");
    REQUIRE(x != nullptr);
    CHECK(x->calibrated_constants.at("c") == 1.0);
    CHECK(x->calibrated_constants.at("c_observed") <= 1.0 + 1e-12);
    const LemmaReport r3 = lemma_suite(3.0, 4000, 3);
    const LemmaResult* y = r3.find("gradient_lipschitz_constant");
    REQUIRE(y != nullptr);
    CHECK(y->calibrated_constants.at("c_analytic") == doctest::Approx(9.0));
    CHECK(y->pass);
  }

  TEST_CASE("reports are deterministic in the seed") {
    const LemmaReport a = lemma_suite(3.0, 300, 42), b = lemma_suite(3.0, 300, 42);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t k = 0; k < a.results.size(); ++k) {
      CHECK(a.results[k].worst_margin == b.results[k].worst_margin);
      CHECK(a.results[k].worst_sample == b.results[k].worst_sample);
    }
  }
}
