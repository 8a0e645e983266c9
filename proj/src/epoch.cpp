#include "tfs/epoch.hpp"

#include <algorithm>
#include <cmath>

namespace tfs {

namespace {

constexpr Real kSlotCap = 4.0e18;  // stay clear of int64 overflow

// round(M^e) with half-up rounding, or -1 when it would overflow.
std::int64_t rounded_power(int M, Real e) {
  const Real v = std::pow(static_cast<Real>(M), e);
  if (!(v < kSlotCap)) return -1;
  return std::llround(v);
}

}  // namespace

EpochPlan build_epoch_plan(int M, Real alpha_star, int K) {
  if (M < 3) throw ConfigError("epoch plan: M must be >= 3 (integer M > 2), got " +
                               std::to_string(M));
  if (!(alpha_star > 0 && alpha_star <= 0.5))
    throw ConfigError("epoch plan: alpha_star must lie in (0, 1/2], got " +
                      std::to_string(alpha_star));
  if (K < 1) throw ConfigError("epoch plan: K must be >= 1");
  EpochPlan plan;
  plan.M = M;
  plan.alpha_star = alpha_star;
  plan.K = K;
  std::int64_t total = 0;
  for (int k = 1; k <= K; ++k) {
    EpochPhaseSpec ph;
    ph.k = k;
    ph.greedy_len = rounded_power(M, static_cast<Real>(k));
    ph.tbs_len = rounded_power(M, static_cast<Real>(k) * (Real(1) + alpha_star / Real(4)));
    ph.est_sample_count = rounded_power(M, static_cast<Real>(k) * alpha_star);
    if (ph.greedy_len < 0 || ph.tbs_len < 0 ||
        static_cast<Real>(total) + static_cast<Real>(ph.greedy_len) +
                static_cast<Real>(ph.tbs_len) >
            kSlotCap) {
      throw ConfigError("epoch plan: slot counts overflow at epoch " + std::to_string(k) +
                        "; maximal feasible K for M=" + std::to_string(M) + " is " +
                        std::to_string(k - 1));
    }
    // The estimate must be computable from history preceding its use.
    const std::int64_t before_tbs = total + ph.greedy_len;
    if (ph.est_sample_count > before_tbs)
      throw ConfigError("epoch plan: est_sample_count exceeds available history at epoch " +
                        std::to_string(k));
    total += ph.greedy_len + ph.tbs_len;
    plan.epochs.push_back(ph);
  }
  plan.total_slots = total;
  return plan;
}

EpochRunResult run_epoch_scheduler(Sampler& sampler, const DemandVector& demands,
                                   const EpochPlan& plan, const StepSchedule& schedule,
                                   TlaMode mode, const std::vector<std::int64_t>& checkpoints,
                                   Rng& rng) {
  if (plan.epochs.empty()) throw ConfigError("run_epoch_scheduler: empty plan");
  const VirtualUserCatalog& cat = sampler.catalog();
  TlaState learner = tla_init(demands, schedule, mode, cat.n_max);
  if (learner.lambda_hat.size() != cat.n)
    throw ConfigError("run_epoch_scheduler: demand size vs catalog n mismatch");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > plan.total_slots ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw ConfigError(
          "run_epoch_scheduler: checkpoints must be strictly increasing within the plan horizon");
  }

  // Snapshot targets: estimate for epoch k is frozen from the background
  // learner state at t = est_sample_count_k.
  std::vector<std::pair<std::int64_t, std::size_t>> snap_at;  // (t, epoch index)
  for (std::size_t e = 0; e < plan.epochs.size(); ++e)
    snap_at.emplace_back(plan.epochs[e].est_sample_count, e);
  std::sort(snap_at.begin(), snap_at.end());

  EpochRunResult out;
  out.total_slots = plan.total_slots;
  out.frozen_estimates.assign(plan.epochs.size(), Vec());
  ShareLedger ledger(cat.n);
  const Vec zero = Vec::Zero(cat.n);
  Vec r;
  std::size_t next_cp = 0;
  std::size_t next_snap = 0;
  std::int64_t t = 0;

  auto emit = [&](int epoch_k, EpochPhase phase) {
    if (!out.trace.empty() && out.trace.back().t == t) return;  // phase end == checkpoint
    EpochTracePoint pt;
    pt.t = t;
    pt.epoch_k = epoch_k;
    pt.phase = phase;
    pt.running_avg_utility = ledger.avg_utility();
    pt.shares = ledger.shares();
    out.trace.push_back(std::move(pt));
  };

  for (std::size_t e = 0; e < plan.epochs.size(); ++e) {
    const EpochPhaseSpec& ph = plan.epochs[e];
    for (int phase_id = 0; phase_id < 2; ++phase_id) {
      const EpochPhase phase = phase_id == 0 ? EpochPhase::greedy : EpochPhase::tbs;
      const std::int64_t len = phase_id == 0 ? ph.greedy_len : ph.tbs_len;
      const Vec* lambda_sched = &zero;
      if (phase == EpochPhase::tbs) {
        if (out.frozen_estimates[e].size() == 0)
          throw ConfigError("run_epoch_scheduler: estimate for epoch " + std::to_string(ph.k) +
                            " not yet available");
        lambda_sched = &out.frozen_estimates[e];
      }
      for (std::int64_t s = 0; s < len; ++s) {
        ++t;
        sampler.draw(rng, r);
        const Index j = tbs_select(r, *lambda_sched, cat);
        ledger.record(cat, j, r[j]);
        // Background learner: closed-loop TLA on its own shadow selection.
        const Index j_shadow = tbs_select(r, learner.lambda_hat, cat);
        tla_step(learner, cat, j_shadow);
        while (next_snap < snap_at.size() && snap_at[next_snap].first == t) {
          out.frozen_estimates[snap_at[next_snap].second] = learner.lambda_hat;
          ++next_snap;
        }
        if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
          emit(ph.k, phase);
          ++next_cp;
        }
      }
      emit(ph.k, phase);  // phase boundary
    }
  }
  out.final_shares = ledger.shares();
  out.final_avg_utility = ledger.avg_utility();
  return out;
}

}  // namespace tfs
