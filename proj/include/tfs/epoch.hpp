#pragma once

#include <cstdint>
#include <vector>

#include "tfs/core.hpp"
#include "tfs/learning.hpp"
#include "tfs/rng.hpp"
#include "tfs/sampler.hpp"
#include "tfs/types.hpp"

namespace tfs {

struct EpochPhaseSpec {
  int k = 0;                          // epoch number, 1-based
  std::int64_t greedy_len = 0;        // M^k
  std::int64_t tbs_len = 0;           // round(M^(k(1+alpha*/4)))
  std::int64_t est_sample_count = 0;  // round(M^(k*alpha*))
};

struct EpochPlan {
  int M = 3;
  Real alpha_star = 0.5;
  int K = 1;
  std::vector<EpochPhaseSpec> epochs;
  std::int64_t total_slots = 0;
};

/// Epoch k = M^k greedy slots then round(M^(k(1+alpha*/4))) frozen-TBS
/// slots; the frozen estimate is the learner state after the first
/// round(M^(k*alpha*)) slots of history. Requires M >= 3, alpha* in (0, 1/2],
/// K >= 1. Throws ConfigError on slot-count overflow, reporting the maximal
/// feasible K. Rounding is half-up.
EpochPlan build_epoch_plan(int M, Real alpha_star, int K);

enum class EpochPhase { greedy, tbs };

struct EpochTracePoint {
  std::int64_t t = 0;
  int epoch_k = 0;
  EpochPhase phase = EpochPhase::greedy;
  Real running_avg_utility = 0;
  Vec shares;
};

struct EpochRunResult {
  std::vector<EpochTracePoint> trace;  // at requested checkpoints + phase ends
  Vec final_shares;
  Real final_avg_utility = 0;
  std::int64_t total_slots = 0;
  std::vector<Vec> frozen_estimates;  // lambda used in epoch k's TBS phase
};

/// Runs the Appendix-B style epoch scheduler: greedy phases use lambda = 0,
/// TBS phases use the frozen background estimate. The background learner
/// performs one TLA update per slot driven by its own (shadow) TBS selection
/// on the shared sample stream, so its estimate tracks lambda* regardless of
/// which phase is actually scheduling. Snapshots of the background estimate
/// are taken at t = est_sample_count_k for each epoch.
/// Trace points are emitted at every requested checkpoint and at the end of
/// every phase (deduplicated).
EpochRunResult run_epoch_scheduler(Sampler& sampler, const DemandVector& demands,
                                   const EpochPlan& plan, const StepSchedule& schedule,
                                   TlaMode mode, const std::vector<std::int64_t>& checkpoints,
                                   Rng& rng);

}  // namespace tfs
