#pragma once

#include <cstdint>
#include <vector>

#include "tfs/core.hpp"
#include "tfs/rng.hpp"
#include "tfs/sampler.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// Robbins-Monro step sizes s_t = s0 * t^(-kappa). kappa in (0.5, 1] is the
/// regime where sum s_t diverges while sum s_t^2 converges.
struct StepSchedule {
  Real s0 = 1.0;
  Real kappa = 0.7;
  Real at(std::int64_t t) const;
};

/// Throws ConfigError unless s0 > 0 and 0.5 < kappa <= 1.
void validate(const StepSchedule& schedule);

enum class TlaMode { equality, lower_bound };

struct TlaState {
  Vec lambda_hat;
  std::int64_t t = 0;
  StepSchedule schedule;
  DemandVector demands;
  TlaMode mode = TlaMode::equality;
};

/// Zero thresholds, t = 0. Throws ConfigError on invalid schedule or
/// infeasible demands (checked against n_max).
TlaState tla_init(const DemandVector& demands, const StepSchedule& schedule, TlaMode mode,
                  int n_max);

/// Applies slot t = state.t + 1: lambda_i += s_t * (w_i - activated_i), then
/// projects onto lambda >= 0 in lower_bound mode. activated is a 0/1 mask of
/// length n (a catalog member row works directly).
void tla_step(TlaState& state, const std::vector<std::uint8_t>& activated);

inline void tla_step(TlaState& state, const VirtualUserCatalog& cat, Index selected) {
  tla_step(state, cat.member[static_cast<std::size_t>(selected)]);
}

/// Per-slot hook for optional trace export; called after the ledger has
/// absorbed the slot, before the learner update.
class SlotObserver {
 public:
  virtual ~SlotObserver() = default;
  virtual void on_slot(std::int64_t t, Index selected, Real utility, const ShareLedger& ledger) = 0;
};

struct TrajectoryPoint {
  std::int64_t t = 0;
  Vec lambda_hat;
  Vec shares;
  Real avg_utility = 0;
};

struct TlaRunResult {
  std::vector<TrajectoryPoint> trajectory;  // one point per checkpoint
  TlaState state;                           // after the final slot
  Vec final_shares;
  Real final_avg_utility = 0;
  std::int64_t horizon = 0;
};

/// Sorted, deduplicated geometric grid with `per_decade` points per decade
/// over [t_min, t_max]; t_max is always included.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t t_min, std::int64_t t_max,
                                                int per_decade);

/// Closed loop: draw sample -> tbs_select at current lambda_hat -> record
/// ledger -> tla_step; snapshots taken whenever t hits a checkpoint.
/// Checkpoints must be strictly increasing within [1, horizon].
TlaRunResult run_tla(Sampler& sampler, const DemandVector& demands, const StepSchedule& schedule,
                     TlaMode mode, std::int64_t horizon,
                     const std::vector<std::int64_t>& checkpoints, Rng& rng,
                     SlotObserver* observer = nullptr);

}  // namespace tfs
