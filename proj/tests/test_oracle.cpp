#include <cmath>
#include <vector>

#include "doctest.h"
#include "tfs/oracle.hpp"
#include "tfs/rng.hpp"
#include "tfs/sampler.hpp"

using namespace tfs;

namespace {

Vec vec2(Real a, Real b) {
  Vec v(2);
  v << a, b;
  return v;
}

constexpr Real kTriDiff = 0.29289321881345248;  // 1 - 1/sqrt(2)

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("r_tilde: direct two-user evaluation") {
  const VirtualUserCatalog cat = enumerate_virtual_users(2, 1);
  // Best subset containing user 0 scores 0.7 (own threshold excluded);
  // best subset without user 0 scores 0.3 + 0.1.
  CHECK(r_tilde(vec2(0.7, 0.3), vec2(0.0, 0.1), cat, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r_tilde(vec2(0.7, 0.3), vec2(0.0, 0.1), cat, 1) == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("r_tilde: undefined for a single user") {
  const VirtualUserCatalog cat = enumerate_virtual_users(1, 1);
  Vec r(1), lambda(1);
  r << 0.5;
  lambda << 0.0;
  CHECK_THROWS_AS(r_tilde(r, lambda, cat, 0), ConfigError);
}

TEST_CASE("r_tilde: activation equivalence with tbs_select") {
  for (int n_max : {1, 2}) {
    const VirtualUserCatalog cat = enumerate_virtual_users(3, n_max);
    Rng rng(500 + n_max);
    for (int rep = 0; rep < 10000; ++rep) {
      Vec r(cat.size()), lambda(3);
      for (Index j = 0; j < r.size(); ++j) r[j] = rng.uniform_in(0, 2);
      for (Index i = 0; i < 3; ++i) lambda[i] = rng.uniform_in(-1, 1);
      const Index sel = tbs_select(r, lambda, cat);
      for (int k = 0; k < 3; ++k) {
        const bool active =
            cat.member[static_cast<std::size_t>(sel)][static_cast<std::size_t>(k)] != 0;
        const bool margin_says = r_tilde(r, lambda, cat, k) >= -lambda[k];
        CHECK(active == margin_says);
      }
    }
  }
}

TEST_CASE("r_tilde of symmetric uniforms at zero thresholds is triangular") {
  const VirtualUserCatalog cat = enumerate_virtual_users(2, 1);
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  Rng rng(77);
  const int draws = 100000;
  int below_m05 = 0, below_0 = 0, below_05 = 0;
  Vec r;
  for (int b = 0; b < draws; ++b) {
    sampler.draw(rng, r);
    const Real v = r_tilde(r, Vec::Zero(2), cat, 0);  // = r0 - r1 here
    below_m05 += v <= -0.5;
    below_0 += v <= 0.0;
    below_05 += v <= 0.5;
  }
  // Triangular CDF on [-1, 1]: F(-0.5) = 1/8, F(0) = 1/2, F(0.5) = 7/8.
  CHECK(std::abs(below_m05 / Real(draws) - 0.125) <= 0.005);
  CHECK(std::abs(below_0 / Real(draws) - 0.5) <= 0.005);
  CHECK(std::abs(below_05 / Real(draws) - 0.875) <= 0.005);
}

TEST_CASE("expected utility: greedy two-uniform mean is 2/3, forced pick is 1/2") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  Rng rng = Rng::substream(9, StreamTag::evaluation);
  const UtilityEstimate greedy = expected_utility_at(Vec::Zero(2), sampler, 1000000, rng);
  CHECK(std::abs(greedy.mean - 2.0 / 3.0) <= 0.002);
  CHECK(greedy.ci_halfwidth > 0.0);
  CHECK(greedy.ci_halfwidth < 0.001);

  Rng rng2 = Rng::substream(9, StreamTag::evaluation, 1);
  const UtilityEstimate forced = expected_utility_at(vec2(1000.0, 0.0), sampler, 200000, rng2);
  CHECK(forced.activation_freq[0] == 1.0);
  CHECK(std::abs(forced.mean - 0.5) <= 0.005);

  // Greedy dominance: random thresholds never beat the zero-threshold mean.
  Rng lam_rng(123);
  for (int rep = 0; rep < 3; ++rep) {
    Rng rng3 = Rng::substream(9, StreamTag::evaluation, 2 + static_cast<std::uint64_t>(rep));
    const Vec lam = vec2(lam_rng.uniform_in(-1, 1), lam_rng.uniform_in(-1, 1));
    const UtilityEstimate other = expected_utility_at(lam, sampler, 200000, rng3);
    CHECK(other.mean <= greedy.mean + 3 * (other.ci_halfwidth + greedy.ci_halfwidth));
  }
}

TEST_CASE("expected utility is gauge invariant under a constant threshold shift") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  const Vec lam = vec2(-0.2, 0.1);
  Rng a = Rng::substream(31, StreamTag::evaluation);
  Rng b = Rng::substream(31, StreamTag::evaluation);
  const UtilityEstimate u1 = expected_utility_at(lam, sampler, 100000, a);
  const UtilityEstimate u2 = expected_utility_at(Vec(lam.array() + 5.0), sampler, 100000, b);
  CHECK(u1.mean == u2.mean);  // same stream, same selections: bitwise equal
  CHECK(u1.activation_freq[0] == u2.activation_freq[0]);
}

TEST_CASE("quantile fixed point: triangular closed form at B=1e6") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  const ReferenceSolution ref =
      quantile_fixed_point(sampler, DemandVector::equality(vec2(0.25, 0.75)), opt, 1234);
  CHECK(ref.converged);
  CHECK(ref.method == "quantile_fixed_point");
  CHECK(ref.lambda_star[1] == 0.0);  // gauge pin
  CHECK(std::abs((ref.lambda_star[1] - ref.lambda_star[0]) - kTriDiff) <= 0.005);
  CHECK(ref.sample_budget >= 10000);
  // Fixed-point property: activation frequencies match demands within 3 SE.
  for (int k = 0; k < 2; ++k) {
    const Real w = k == 0 ? 0.25 : 0.75;
    const Real se = std::sqrt(w * (1 - w) / static_cast<Real>(opt.u_batch));
    CHECK(std::abs(ref.activation_freq[k] - w) <= 3 * se);
  }
}

TEST_CASE("quantile fixed point: symmetry and the greedy-equivalent utility") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  const ReferenceSolution ref =
      quantile_fixed_point(sampler, DemandVector::equality(vec2(0.5, 0.5)), opt, 99);
  CHECK(ref.converged);
  CHECK(std::abs(ref.lambda_star[0] - ref.lambda_star[1]) <= 0.005);
  CHECK(std::abs(ref.u_star - 2.0 / 3.0) <= 0.002);
}

TEST_CASE("asymmetric fair utility stays below the greedy optimum") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  const ReferenceSolution fair =
      quantile_fixed_point(sampler, DemandVector::equality(vec2(0.25, 0.75)), opt, 7);
  Rng rng = Rng::substream(7, StreamTag::evaluation, 42);
  const UtilityEstimate greedy = expected_utility_at(Vec::Zero(2), sampler, 1000000, rng);
  CHECK(fair.u_star < greedy.mean - 3 * (fair.ci_halfwidth + greedy.ci_halfwidth));
}

TEST_CASE("quantile fixed point flags non-convergence instead of throwing") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  opt.max_iters = 1;
  opt.tol = 1e-9;
  opt.batch = 10000;
  opt.u_batch = 10000;
  const ReferenceSolution ref =
      quantile_fixed_point(sampler, DemandVector::equality(vec2(0.25, 0.75)), opt, 5);
  CHECK_FALSE(ref.converged);
  CHECK(ref.sweeps_used == 1);
}

TEST_CASE("quantile fixed point rejects bound-mode demands") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  CHECK_THROWS_AS(
      quantile_fixed_point(sampler, DemandVector::lower_bounds(vec2(0.25, 0.75)), opt, 1),
      ConfigError);
}

TEST_CASE("multistart agreement check on the analytic setting") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  QfpOptions opt;
  opt.batch = 200000;
  opt.u_batch = 100000;
  opt.check_agreement = true;
  const ReferenceSolution ref =
      quantile_fixed_point(sampler, DemandVector::equality(vec2(0.25, 0.75)), opt, 11);
  CHECK(ref.multistart_checked);
  CHECK(ref.multistart_agrees);
  CHECK(ref.multistart_max_dev <= opt.agreement_tol);
}

TEST_CASE("long-run reference agrees with the quantile oracle on differences") {
  SyntheticSampler sampler(SyntheticKind::uniform01, 2);
  const DemandVector demands = DemandVector::equality(vec2(0.25, 0.75));
  QfpOptions opt;
  const ReferenceSolution qfp = quantile_fixed_point(sampler, demands, opt, 2024);
  const ReferenceSolution lr =
      long_run_reference(sampler, demands, StepSchedule{}, TlaMode::equality, 1000000, 2024);
  CHECK(lr.method == "long_run_tla");
  CHECK(lr.converged);
  const Real d_qfp = qfp.lambda_star[1] - qfp.lambda_star[0];
  const Real d_lr = lr.lambda_star[1] - lr.lambda_star[0];
  CHECK(std::abs(d_qfp - d_lr) <= 0.01);
  // The frozen replay tracks the demanded shares closely.
  CHECK(std::abs(lr.activation_freq[0] - 0.25) <= 0.01);
  CHECK(std::abs(lr.activation_freq[1] - 0.75) <= 0.01);
  CHECK(lr.sample_budget == 1000000 + 100000);
  CHECK_THROWS_AS(
      long_run_reference(sampler, demands, StepSchedule{}, TlaMode::equality, 999999, 1),
      ConfigError);
}

TEST_SUITE_END();
