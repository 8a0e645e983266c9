#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfs/learning.hpp"
#include "tfs/oracle.hpp"
#include "tfs/sampler.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// sqrt(t)-scaled convergence measures averaged over replications:
///   x_t = sqrt(t) * mean over reps of ||lambda* - lambda_hat_t||_inf
///   y_t = sqrt(t) * mean over reps of (U* - U_hat_t)      (signed, no |.|_+)
struct RoCSeries {
  std::vector<std::int64_t> checkpoints;
  Vec x, y;
  Vec stderr_x, stderr_y;  // sqrt(t)-scaled standard errors over reps
  int reps = 0;
  std::string setting;
  std::string reference_hash;
};

struct RocOptions {
  int reps = 100;
  std::int64_t horizon = 200'000;
  std::vector<std::int64_t> checkpoints;  // empty -> geometric 50/decade from 10
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string setting_name = "synthetic";
  std::string expected_setting_hash;  // nonempty -> must equal ref.setting_hash
};

/// lambda* as used for the infinity-norm comparison. TLA in equality mode
/// with one active user per slot evolves in the zero-sum gauge (the update
/// sums to zero when demands sum to 1), while the quantile oracle pins
/// lambda_n = 0; this shifts such a reference into the learner's gauge.
/// All other combinations are returned unchanged.
Vec align_reference_gauge(const Vec& lambda_star, const VirtualUserCatalog& cat, TlaMode mode,
                          const std::string& method);

/// One independent TLA replication per seed substream; fixed placement is
/// the sampler prototype's (clones share it), fading is fresh per rep.
/// Aggregation is a sequential reduce over replication index, so results do
/// not depend on the thread count. Throws ReferenceMismatch when the
/// reference's setting hash differs from the expected one.
RoCSeries roc_experiment(const Sampler& prototype, const DemandVector& demands,
                         const StepSchedule& schedule, TlaMode mode,
                         const ReferenceSolution& reference, const RocOptions& opt);

struct RoCSummary {
  bool slope_available = false;
  Real slope = 0;  // log-log slope of mean error e_t = x_t/sqrt(t), last decade
  std::string slope_warning;
  Real flatness_ratio = 0;  // x(T) / x(checkpoint nearest T/4)
  std::int64_t flatness_t0 = 0;
  std::int64_t flatness_t1 = 0;
  bool y_all_negative_tail = false;  // y_t < 0 at every checkpoint >= 1000
  int y_tail_points = 0;
  std::string verdict_x;
  std::string verdict_y;
};

/// Last-decade log-log slope fit, flatness ratio, and y-sign profile.
RoCSummary summarize(const RoCSeries& series);

}  // namespace tfs
