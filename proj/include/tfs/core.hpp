#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfs/types.hpp"

namespace tfs {

/// The ordered list of user subsets that can be activated in one slot.
/// Canonical order: increasing subset size, then lexicographic by member
/// indices. The empty set is excluded — some user is always scheduled.
struct VirtualUserCatalog {
  int n = 0;      // user count
  int n_max = 0;  // max simultaneously active users
  std::vector<std::vector<int>> subsets;          // canonical order, size m
  std::vector<std::vector<std::uint8_t>> member;  // m x n incidence, 0/1
  Mat membership;                                 // m x n incidence as Real

  Index size() const { return static_cast<Index>(subsets.size()); }
};

/// All subsets of {0..n-1} with 1..n_max members, canonical order.
/// Throws ConfigError unless 1 <= n_max <= n.
VirtualUserCatalog enumerate_virtual_users(int n, int n_max);

/// Threshold scores for every virtual user: score_j = r_j + sum of member
/// thresholds. Equivalent to r + membership * lambda.
Vec tbs_scores(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat);

/// Index of the virtual user maximizing r_j + sum_{i in V_j} lambda_i.
/// Ties resolve to the smallest canonical index.
Index tbs_select(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat);

/// Running activation counts and cumulative utility for one scheduling run.
/// The utility sum is compensated so million-slot ledgers stay accurate.
class ShareLedger {
 public:
  explicit ShareLedger(int n) : activations_(VecI::Zero(n)) {}

  void record(const VirtualUserCatalog& cat, Index selected, Real utility) {
    ++t_;
    for (int u : cat.subsets[static_cast<std::size_t>(selected)]) ++activations_[u];
    utility_.add(utility);
  }

  std::int64_t t() const { return t_; }
  const VecI& activations() const { return activations_; }
  Vec shares() const {
    if (t_ == 0) return Vec::Zero(activations_.size());
    return activations_.cast<Real>() / static_cast<Real>(t_);
  }
  Real cumulative_utility() const { return utility_.value(); }
  Real avg_utility() const { return t_ == 0 ? Real(0) : utility_.value() / static_cast<Real>(t_); }

 private:
  std::int64_t t_ = 0;
  VecI activations_;
  KahanSum utility_;
};

enum class DemandMode { equality, bounds };

/// Per-user temporal demands: required share (equality) or share bounds.
struct DemandVector {
  Vec w_lower;
  Vec w_upper;
  DemandMode mode = DemandMode::equality;

  static DemandVector equality(Vec w) {
    DemandVector d;
    d.w_lower = w;
    d.w_upper = std::move(w);
    d.mode = DemandMode::equality;
    return d;
  }
  static DemandVector lower_bounds(Vec w) {
    DemandVector d;
    d.w_lower = std::move(w);
    d.w_upper = Vec::Ones(d.w_lower.size());
    d.mode = DemandMode::bounds;
    return d;
  }
  Index size() const { return w_lower.size(); }
};

/// Throws ConfigError if the demand vector violates its own invariants
/// (sizes, ranges, lower <= upper, equality consistency).
void validate(const DemandVector& demands);

struct FeasibilityReport {
  bool ok = false;
  Real demand_sum = 0;
  std::string message;
};

/// Feasibility precheck: for n_max in {1, 2} the sum of lower demands must
/// not exceed 1. General N_max feasibility is not certified here; larger
/// demand sums are accepted for n_max >= 3.
FeasibilityReport check_feasibility(const DemandVector& demands, int n_max);

}  // namespace tfs
