#include "tfs/learning.hpp"

#include <algorithm>
#include <cmath>

namespace tfs {

Real StepSchedule::at(std::int64_t t) const {
  return s0 * std::pow(static_cast<Real>(t), -kappa);
}

void validate(const StepSchedule& schedule) {
  if (!(schedule.s0 > 0))
    throw ConfigError("schedule: s0 must be > 0, got " + std::to_string(schedule.s0));
  if (!(schedule.kappa > 0.5 && schedule.kappa <= 1.0))
    throw ConfigError("schedule: kappa must lie in (0.5, 1], got " +
                      std::to_string(schedule.kappa) +
                      " (outside this range sum(s_t)=inf, sum(s_t^2)<inf fails)");
}

TlaState tla_init(const DemandVector& demands, const StepSchedule& schedule, TlaMode mode,
                  int n_max) {
  validate(schedule);
  const FeasibilityReport rep = check_feasibility(demands, n_max);
  if (!rep.ok) throw ConfigError("tla_init: " + rep.message);
  TlaState st;
  st.lambda_hat = Vec::Zero(demands.size());
  st.t = 0;
  st.schedule = schedule;
  st.demands = demands;
  st.mode = mode;
  return st;
}

void tla_step(TlaState& state, const std::vector<std::uint8_t>& activated) {
  const Index n = state.lambda_hat.size();
  if (static_cast<Index>(activated.size()) != n)
    throw ConfigError("tla_step: activation mask size " + std::to_string(activated.size()) +
                      " vs n=" + std::to_string(n));
  const Real s = state.schedule.at(state.t + 1);
  const bool project = state.mode == TlaMode::lower_bound;
  for (Index i = 0; i < n; ++i) {
    const Real a = activated[static_cast<std::size_t>(i)] ? Real(1) : Real(0);
    Real v = state.lambda_hat[i] + s * (state.demands.w_lower[i] - a);
    if (project && v < 0) v = 0;
    state.lambda_hat[i] = v;
  }
  ++state.t;
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t t_min, std::int64_t t_max,
                                                int per_decade) {
  if (t_min < 1 || t_max < t_min || per_decade < 1)
    throw ConfigError("geometric_checkpoints: need 1 <= t_min <= t_max and per_decade >= 1");
  std::vector<std::int64_t> pts;
  const Real lo = std::log10(static_cast<Real>(t_min));
  const Real hi = std::log10(static_cast<Real>(t_max));
  const std::int64_t k0 = static_cast<std::int64_t>(std::ceil(lo * per_decade - 1e-9));
  const std::int64_t k1 = static_cast<std::int64_t>(std::floor(hi * per_decade + 1e-9));
  for (std::int64_t k = k0; k <= k1; ++k) {
    const Real v = std::pow(Real(10), static_cast<Real>(k) / per_decade);
    std::int64_t t = std::llround(v);
    t = std::max(t_min, std::min(t_max, t));
    if (pts.empty() || t > pts.back()) pts.push_back(t);
  }
  if (pts.empty() || pts.back() != t_max) pts.push_back(t_max);
  return pts;
}

TlaRunResult run_tla(Sampler& sampler, const DemandVector& demands, const StepSchedule& schedule,
                     TlaMode mode, std::int64_t horizon,
                     const std::vector<std::int64_t>& checkpoints, Rng& rng,
                     SlotObserver* observer) {
  if (horizon < 1) throw ConfigError("run_tla: horizon must be >= 1");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > horizon ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw ConfigError("run_tla: checkpoints must be strictly increasing within [1, horizon]");
  }
  const VirtualUserCatalog& cat = sampler.catalog();
  TlaState st = tla_init(demands, schedule, mode, cat.n_max);
  if (st.lambda_hat.size() != cat.n)
    throw ConfigError("run_tla: demand size " + std::to_string(st.lambda_hat.size()) +
                      " vs catalog n=" + std::to_string(cat.n));
  ShareLedger ledger(cat.n);
  TlaRunResult out;
  out.trajectory.reserve(checkpoints.size());
  out.horizon = horizon;
  Vec r;
  std::size_t next_cp = 0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    sampler.draw(rng, r);
    const Index j = tbs_select(r, st.lambda_hat, cat);
    ledger.record(cat, j, r[j]);
    if (observer != nullptr) observer->on_slot(t, j, r[j], ledger);
    tla_step(st, cat, j);
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      TrajectoryPoint pt;
      pt.t = t;
      pt.lambda_hat = st.lambda_hat;
      pt.shares = ledger.shares();
      pt.avg_utility = ledger.avg_utility();
      out.trajectory.push_back(std::move(pt));
      ++next_cp;
    }
  }
  out.final_shares = ledger.shares();
  out.final_avg_utility = ledger.avg_utility();
  out.state = std::move(st);
  return out;
}

}  // namespace tfs
