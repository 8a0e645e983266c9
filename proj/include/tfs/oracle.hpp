#pragma once

#include <cstdint>
#include <string>

#include "tfs/core.hpp"
#include "tfs/learning.hpp"
#include "tfs/rng.hpp"
#include "tfs/sampler.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// Reference quantities lambda* / U* computed independently of the learner.
struct ReferenceSolution {
  Vec lambda_star;
  Real u_star = 0;
  std::string method;  // "quantile_fixed_point" | "long_run_tla"
  std::int64_t sample_budget = 0;
  Real ci_halfwidth = 0;      // 95% normal CI on u_star
  bool converged = true;      // quantile iteration only; long runs always true
  int sweeps_used = 0;
  Vec activation_freq;        // empirical shares under frozen TBS at lambda_star
  std::string setting_hash;   // filled by the caller when caching
  // Multistart diagnostics (quantile iteration, optional):
  bool multistart_checked = false;
  bool multistart_agrees = true;
  Real multistart_max_dev = 0;
};

/// Score margin of user k at thresholds lambda (Eq. 8 context):
///   max over subsets containing k of (r_j + sum of member thresholds except
///   lambda_k) minus max over subsets excluding k of (r_j + sum of member
///   thresholds). tbs_select activates k iff this is >= -lambda_k.
/// Throws ConfigError when n = 1 (the excluded-k max is over an empty set).
Real r_tilde(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat, int k);

struct UtilityEstimate {
  Real mean = 0;
  Real ci_halfwidth = 0;
  std::int64_t batch = 0;
  Vec activation_freq;
};

/// Monte Carlo expected one-slot utility of the frozen TBS at lambda.
UtilityEstimate expected_utility_at(const Vec& lambda, Sampler& sampler, std::int64_t batch,
                                    Rng& rng);

struct QfpOptions {
  std::int64_t batch = 1'000'000;   // fresh draws per coordinate update
  Real tol = 1e-3;                  // sweep sup-norm stopping threshold
  int max_iters = 200;              // maximum sweeps
  std::int64_t u_batch = 1'000'000; // draws for the final U* estimate
  bool check_agreement = false;     // rerun from a random init and compare
  Real agreement_tol = 1e-2;
  Real multistart_scale = 2.0;      // random init range [-scale, scale]
};

/// Coordinate-wise empirical-quantile iteration for the fixed point of
/// Eq. 6/7: lambda_k <- -(empirical (1-w_k)-quantile of r_tilde(., k)).
/// Fresh substream per (sweep, k). Equality-mode demands required. For
/// N_max = 1 only threshold differences are identified; lambda_n is pinned
/// to 0 as the gauge. Non-convergence is flagged, not thrown.
ReferenceSolution quantile_fixed_point(Sampler& sampler, const DemandVector& demands,
                                       const QfpOptions& opt, std::uint64_t seed);

/// Section-IV style reference: run the closed TLA loop for t_ref slots,
/// tail-average lambda_hat over the last t_ref/10 slots, then replay a
/// frozen TBS at that average for t_ref/10 slots to estimate U* with CI.
ReferenceSolution long_run_reference(Sampler& sampler, const DemandVector& demands,
                                     const StepSchedule& schedule, TlaMode mode,
                                     std::int64_t t_ref, std::uint64_t seed);

}  // namespace tfs
