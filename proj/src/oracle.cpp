#include "tfs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tfs {

Real r_tilde(const Vec& r, const Vec& lambda, const VirtualUserCatalog& cat, int k) {
  if (cat.n < 2)
    throw ConfigError("r_tilde: undefined for n=1 (no virtual user excludes the user)");
  if (k < 0 || k >= cat.n) throw ConfigError("r_tilde: user index out of range");
  if (r.size() != cat.size() || lambda.size() != cat.n)
    throw ConfigError("r_tilde: size mismatch with catalog");
  Real best_in = -std::numeric_limits<Real>::infinity();
  Real best_out = -std::numeric_limits<Real>::infinity();
  const Index m = cat.size();
  for (Index j = 0; j < m; ++j) {
    Real score = r[j];
    bool has_k = false;
    for (int u : cat.subsets[static_cast<std::size_t>(j)]) {
      if (u == k) {
        has_k = true;
      } else {
        score += lambda[u];
      }
    }
    if (has_k) {
      if (score > best_in) best_in = score;
    } else {
      if (score > best_out) best_out = score;
    }
  }
  return best_in - best_out;
}

UtilityEstimate expected_utility_at(const Vec& lambda, Sampler& sampler, std::int64_t batch,
                                    Rng& rng) {
  if (batch < 1) throw ConfigError("expected_utility_at: batch must be >= 1");
  const VirtualUserCatalog& cat = sampler.catalog();
  KahanSum sum, sumsq;
  VecI counts = VecI::Zero(cat.n);
  Vec r;
  for (std::int64_t b = 0; b < batch; ++b) {
    sampler.draw(rng, r);
    const Index j = tbs_select(r, lambda, cat);
    const Real u = r[j];
    sum.add(u);
    sumsq.add(u * u);
    for (int usr : cat.subsets[static_cast<std::size_t>(j)]) ++counts[usr];
  }
  UtilityEstimate est;
  est.batch = batch;
  est.mean = sum.value() / static_cast<Real>(batch);
  const Real var =
      std::max(Real(0), sumsq.value() / static_cast<Real>(batch) - est.mean * est.mean);
  est.ci_halfwidth = Real(1.96) * std::sqrt(var / static_cast<Real>(batch));
  est.activation_freq = counts.cast<Real>() / static_cast<Real>(batch);
  return est;
}

namespace {

// Empirical q-quantile by nearest-rank on the [0, B-1] scale (no
// interpolation; convention error is O(1/B), far below Monte Carlo noise).
Real empirical_quantile(std::vector<Real>& vals, Real q) {
  const auto b = static_cast<std::int64_t>(vals.size());
  std::int64_t idx = std::llround(q * static_cast<Real>(b - 1));
  idx = std::max<std::int64_t>(0, std::min(b - 1, idx));
  std::nth_element(vals.begin(), vals.begin() + idx, vals.end());
  return vals[static_cast<std::size_t>(idx)];
}

struct QfpIterate {
  Vec lambda;
  bool converged = false;
  int sweeps = 0;
  std::int64_t draws = 0;
};

QfpIterate qfp_iterate(Sampler& sampler, const DemandVector& demands, const QfpOptions& opt,
                       std::uint64_t seed, const Vec& lambda0, std::uint64_t stream_salt) {
  const VirtualUserCatalog& cat = sampler.catalog();
  const int n = cat.n;
  const int n_free = cat.n_max == 1 ? n - 1 : n;  // gauge: pin lambda_n = 0 for N_max = 1
  QfpIterate it;
  it.lambda = lambda0;
  std::vector<Real> vals(static_cast<std::size_t>(opt.batch));
  Vec r;
  for (int sweep = 1; sweep <= opt.max_iters; ++sweep) {
    Real max_delta = 0;
    for (int k = 0; k < n_free; ++k) {
      Rng rng = Rng::substream(seed, StreamTag::oracle,
                               static_cast<std::uint64_t>(sweep) + stream_salt,
                               static_cast<std::uint64_t>(k));
      for (std::int64_t b = 0; b < opt.batch; ++b) {
        sampler.draw(rng, r);
        vals[static_cast<std::size_t>(b)] = r_tilde(r, it.lambda, cat, k);
      }
      it.draws += opt.batch;
      const Real q = empirical_quantile(vals, Real(1) - demands.w_lower[k]);
      const Real next = -q;
      max_delta = std::max(max_delta, std::abs(next - it.lambda[k]));
      it.lambda[k] = next;  // Gauss-Seidel: later coordinates see the update
    }
    it.sweeps = sweep;
    if (max_delta < opt.tol) {
      it.converged = true;
      break;
    }
  }
  return it;
}

}  // namespace

ReferenceSolution quantile_fixed_point(Sampler& sampler, const DemandVector& demands,
                                       const QfpOptions& opt, std::uint64_t seed) {
  const VirtualUserCatalog& cat = sampler.catalog();
  if (demands.mode != DemandMode::equality)
    throw ConfigError("quantile_fixed_point: equality-mode demands required");
  if (demands.size() != cat.n)
    throw ConfigError("quantile_fixed_point: demand size vs catalog n mismatch");
  if (cat.n < 2) throw ConfigError("quantile_fixed_point: needs n >= 2");
  if (opt.batch < 1 || opt.max_iters < 1 || !(opt.tol > 0))
    throw ConfigError("quantile_fixed_point: invalid options");
  const FeasibilityReport rep = check_feasibility(demands, cat.n_max);
  if (!rep.ok) throw ConfigError("quantile_fixed_point: " + rep.message);

  QfpIterate main = qfp_iterate(sampler, demands, opt, seed, Vec::Zero(cat.n), 0);

  ReferenceSolution ref;
  ref.lambda_star = main.lambda;
  ref.method = "quantile_fixed_point";
  ref.converged = main.converged;
  ref.sweeps_used = main.sweeps;
  ref.sample_budget = main.draws;

  Rng eval_rng = Rng::substream(seed, StreamTag::evaluation);
  const UtilityEstimate est = expected_utility_at(ref.lambda_star, sampler, opt.u_batch, eval_rng);
  ref.u_star = est.mean;
  ref.ci_halfwidth = est.ci_halfwidth;
  ref.activation_freq = est.activation_freq;
  ref.sample_budget += est.batch;

  if (opt.check_agreement) {
    Rng init_rng = Rng::substream(seed, StreamTag::misc);
    Vec lambda0 = Vec::Zero(cat.n);
    const int n_free = cat.n_max == 1 ? cat.n - 1 : cat.n;
    for (int k = 0; k < n_free; ++k)
      lambda0[k] = init_rng.uniform_in(-opt.multistart_scale, opt.multistart_scale);
    // Same per-(sweep, k) substreams offset by a salt so the batches differ.
    QfpIterate alt = qfp_iterate(sampler, demands, opt, seed, lambda0, 1u << 20);
    ref.multistart_checked = true;
    ref.sample_budget += alt.draws;
    Real dev = 0;
    for (int k = 0; k < n_free; ++k) dev = std::max(dev, std::abs(alt.lambda[k] - main.lambda[k]));
    ref.multistart_max_dev = dev;
    ref.multistart_agrees = alt.converged && dev <= opt.agreement_tol;
  }
  return ref;
}

ReferenceSolution long_run_reference(Sampler& sampler, const DemandVector& demands,
                                     const StepSchedule& schedule, TlaMode mode,
                                     std::int64_t t_ref, std::uint64_t seed) {
  if (t_ref < 1'000'000)
    throw ConfigError("long_run_reference: t_ref must be >= 1e6, got " + std::to_string(t_ref));
  const VirtualUserCatalog& cat = sampler.catalog();
  TlaState st = tla_init(demands, schedule, mode, cat.n_max);
  if (st.lambda_hat.size() != cat.n)
    throw ConfigError("long_run_reference: demand size vs catalog n mismatch");

  const std::int64_t window = t_ref / 10;
  const std::int64_t tail_start = t_ref - window + 1;
  std::vector<KahanSum> tail(static_cast<std::size_t>(cat.n));
  Rng learn_rng = Rng::substream(seed, StreamTag::reference, 0);
  Vec r;
  for (std::int64_t t = 1; t <= t_ref; ++t) {
    sampler.draw(learn_rng, r);
    const Index j = tbs_select(r, st.lambda_hat, cat);
    tla_step(st, cat, j);
    if (t >= tail_start)
      for (Index i = 0; i < cat.n; ++i) tail[static_cast<std::size_t>(i)].add(st.lambda_hat[i]);
  }
  ReferenceSolution ref;
  ref.lambda_star = Vec::Zero(cat.n);
  for (Index i = 0; i < cat.n; ++i)
    ref.lambda_star[i] = tail[static_cast<std::size_t>(i)].value() / static_cast<Real>(window);
  ref.method = "long_run_tla";
  ref.sweeps_used = 0;
  ref.converged = true;

  // Frozen replay at the tail-averaged thresholds on a fresh stream.
  Rng replay_rng = Rng::substream(seed, StreamTag::reference, 1);
  const UtilityEstimate est = expected_utility_at(ref.lambda_star, sampler, window, replay_rng);
  ref.u_star = est.mean;
  ref.ci_halfwidth = est.ci_halfwidth;
  ref.activation_freq = est.activation_freq;
  ref.sample_budget = t_ref + window;
  return ref;
}

}  // namespace tfs
