#include "tfs/core.hpp"

#include <algorithm>
#include <cmath>

namespace tfs {

namespace {

void emit_subsets_of_size(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(k);
  // Standard lexicographic k-combinations of {0..n-1}.
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
}

}  // namespace

VirtualUserCatalog enumerate_virtual_users(int n, int n_max) {
  if (n < 1) throw ConfigError("enumerate_virtual_users: n must be >= 1, got " + std::to_string(n));
  if (n_max < 1 || n_max > n)
    throw ConfigError("enumerate_virtual_users: need 1 <= n_max <= n, got n_max=" +
                      std::to_string(n_max) + " with n=" + std::to_string(n));
  VirtualUserCatalog cat;
  cat.n = n;
  cat.n_max = n_max;
  for (int k = 1; k <= n_max; ++k) emit_subsets_of_size(n, k, cat.subsets);
  const Index m = static_cast<Index>(cat.subsets.size());
  cat.member.assign(cat.subsets.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
  cat.membership = Mat::Zero(m, n);
  for (Index j = 0; j < m; ++j) {
    for (int u : cat.subsets[static_cast<std::size_t>(j)]) {
      cat.member[static_cast<std::size_t>(j)][static_cast<std::size_t>(u)] = 1;
      cat.membership(j, u) = 1;
    }
  }
  return cat;
}

Vec tbs_scores(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat) {
  if (r.size() != cat.size())
    throw ConfigError("tbs_scores: r has size " + std::to_string(r.size()) + ", catalog has " +
                      std::to_string(cat.size()) + " virtual users");
  if (lambda.size() != cat.n)
    throw ConfigError("tbs_scores: lambda has size " + std::to_string(lambda.size()) +
                      ", catalog has n=" + std::to_string(cat.n));
  return r + cat.membership * lambda;
}

Index tbs_select(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat) {
  if (r.size() != cat.size())
    throw ConfigError("tbs_select: r has size " + std::to_string(r.size()) + ", catalog has " +
                      std::to_string(cat.size()) + " virtual users");
  if (lambda.size() != cat.n)
    throw ConfigError("tbs_select: lambda has size " + std::to_string(lambda.size()) +
                      ", catalog has n=" + std::to_string(cat.n));
  const Index m = cat.size();
  Index best = 0;
  Real best_score = r[0];
  for (int u : cat.subsets[0]) best_score += lambda[u];
  for (Index j = 1; j < m; ++j) {
    Real s = r[j];
    for (int u : cat.subsets[static_cast<std::size_t>(j)]) s += lambda[u];
    if (s > best_score) {  // strict: ties keep the earlier canonical index
      best_score = s;
      best = j;
    }
  }
  return best;
}

void validate(const DemandVector& demands) {
  const Index n = demands.w_lower.size();
  if (n < 1) throw ConfigError("demands: need at least one user");
  if (demands.w_upper.size() != n)
    throw ConfigError("demands: lower/upper size mismatch (" + std::to_string(n) + " vs " +
                      std::to_string(demands.w_upper.size()) + ")");
  for (Index i = 0; i < n; ++i) {
    if (!(demands.w_lower[i] >= 0 && demands.w_lower[i] <= 1))
      throw ConfigError("demands: w_lower[" + std::to_string(i) + "]=" +
                        std::to_string(demands.w_lower[i]) + " outside [0,1]");
    if (!(demands.w_upper[i] >= 0 && demands.w_upper[i] <= 1))
      throw ConfigError("demands: w_upper[" + std::to_string(i) + "]=" +
                        std::to_string(demands.w_upper[i]) + " outside [0,1]");
    if (demands.w_lower[i] > demands.w_upper[i])
      throw ConfigError("demands: w_lower[" + std::to_string(i) + "] exceeds w_upper[" +
                        std::to_string(i) + "]");
  }
  if (demands.mode == DemandMode::equality) {
    for (Index i = 0; i < n; ++i)
      if (demands.w_lower[i] != demands.w_upper[i])
        throw ConfigError("demands: equality mode requires w_lower == w_upper");
  }
}

FeasibilityReport check_feasibility(const DemandVector& demands, int n_max) {
  validate(demands);
  FeasibilityReport rep;
  rep.demand_sum = demands.w_lower.sum();
  if ((n_max == 1 || n_max == 2) && rep.demand_sum > Real(1) + 1e-12) {
    rep.ok = false;
    rep.message = "demand sum " + std::to_string(rep.demand_sum) +
                  " exceeds 1; lower demands must satisfy sum(w) <= 1 for n_max=" +
                  std::to_string(n_max);
    return rep;
  }
  // With exactly one user per slot the shares sum to 1 identically, so
  // equality demands can only all hold when they sum to 1.
  if (n_max == 1 && demands.mode == DemandMode::equality &&
      std::abs(rep.demand_sum - Real(1)) > 1e-12) {
    rep.ok = false;
    rep.message = "demand sum " + std::to_string(rep.demand_sum) +
                  " != 1; with n_max=1 shares sum to 1 every slot, so equality "
                  "demands must sum to 1";
    return rep;
  }
  rep.ok = true;
  rep.message = "feasible";
  return rep;
}

}  // namespace tfs
