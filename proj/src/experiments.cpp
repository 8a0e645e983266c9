#include "tfs/experiments.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace tfs {

Vec align_reference_gauge(const Vec& lambda_star, const VirtualUserCatalog& cat, TlaMode mode,
                          const std::string& method) {
  if (cat.n_max == 1 && mode == TlaMode::equality && method == "quantile_fixed_point")
    return lambda_star.array() - lambda_star.mean();
  return lambda_star;
}

RoCSeries roc_experiment(const Sampler& prototype, const DemandVector& demands,
                         const StepSchedule& schedule, TlaMode mode,
                         const ReferenceSolution& reference, const RocOptions& opt) {
  if (opt.reps < 1) throw ConfigError("roc_experiment: reps must be >= 1");
  if (!opt.expected_setting_hash.empty() && !reference.setting_hash.empty() &&
      opt.expected_setting_hash != reference.setting_hash)
    throw ReferenceMismatch("roc_experiment: reference setting hash " + reference.setting_hash +
                            " does not match current setting " + opt.expected_setting_hash);
  const VirtualUserCatalog& cat = prototype.catalog();
  std::vector<std::int64_t> cps =
      opt.checkpoints.empty() ? geometric_checkpoints(10, opt.horizon, 50) : opt.checkpoints;
  const std::size_t C = cps.size();
  const Vec lambda_star = align_reference_gauge(reference.lambda_star, cat, mode, reference.method);

  // Per-replication error matrices, filled in parallel, reduced sequentially.
  Mat err(static_cast<Index>(opt.reps), static_cast<Index>(C));
  Mat gap(static_cast<Index>(opt.reps), static_cast<Index>(C));

  std::atomic<int> next_rep{0};
  auto worker = [&]() {
    std::unique_ptr<Sampler> sampler = prototype.clone();
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= opt.reps) break;
      Rng rng = Rng::substream(opt.master_seed, StreamTag::replication,
                               static_cast<std::uint64_t>(rep));
      const TlaRunResult run =
          run_tla(*sampler, demands, schedule, mode, opt.horizon, cps, rng);
      for (std::size_t c = 0; c < C; ++c) {
        const TrajectoryPoint& pt = run.trajectory[c];
        err(rep, static_cast<Index>(c)) = (lambda_star - pt.lambda_hat).cwiseAbs().maxCoeff();
        gap(rep, static_cast<Index>(c)) = reference.u_star - pt.avg_utility;
      }
    }
  };
  const int n_threads = std::max(1, std::min(opt.threads, opt.reps));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RoCSeries series;
  series.checkpoints = std::move(cps);
  series.reps = opt.reps;
  series.setting = opt.setting_name;
  series.reference_hash = reference.setting_hash;
  series.x.resize(static_cast<Index>(C));
  series.y.resize(static_cast<Index>(C));
  series.stderr_x.resize(static_cast<Index>(C));
  series.stderr_y.resize(static_cast<Index>(C));
  const Real nr = static_cast<Real>(opt.reps);
  for (std::size_t c = 0; c < C; ++c) {
    const Real rt = std::sqrt(static_cast<Real>(series.checkpoints[c]));
    KahanSum se, se2, sg, sg2;
    for (int rep = 0; rep < opt.reps; ++rep) {  // fixed order: thread-count independent
      const Real e = err(rep, static_cast<Index>(c));
      const Real g = gap(rep, static_cast<Index>(c));
      se.add(e);
      se2.add(e * e);
      sg.add(g);
      sg2.add(g * g);
    }
    const Real me = se.value() / nr;
    const Real mg = sg.value() / nr;
    const Real ve = std::max(Real(0), se2.value() / nr - me * me);
    const Real vg = std::max(Real(0), sg2.value() / nr - mg * mg);
    series.x[static_cast<Index>(c)] = rt * me;
    series.y[static_cast<Index>(c)] = rt * mg;
    series.stderr_x[static_cast<Index>(c)] = rt * std::sqrt(ve / nr);
    series.stderr_y[static_cast<Index>(c)] = rt * std::sqrt(vg / nr);
  }
  return series;
}

RoCSummary summarize(const RoCSeries& series) {
  if (series.checkpoints.empty()) throw ConfigError("summarize: empty series");
  RoCSummary sum;
  const std::size_t C = series.checkpoints.size();
  const std::int64_t t_last = series.checkpoints.back();

  // Log-log slope of the unscaled mean error e_t = x_t / sqrt(t) over the
  // last decade. x_t exactly constant gives slope -1/2 by construction.
  std::vector<std::size_t> decade;
  for (std::size_t c = 0; c < C; ++c)
    if (series.checkpoints[c] * 10 >= t_last && series.x[static_cast<Index>(c)] > 0)
      decade.push_back(c);
  if (decade.size() < 5) {
    sum.slope_available = false;
    sum.slope_warning = "fewer than 5 positive checkpoints in the last decade; slope omitted";
  } else {
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t c : decade) {
      const Real lx = std::log(static_cast<Real>(series.checkpoints[c]));
      const Real ly = std::log(series.x[static_cast<Index>(c)]) -
                      Real(0.5) * std::log(static_cast<Real>(series.checkpoints[c]));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const Real m = static_cast<Real>(decade.size());
    sum.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    sum.slope_available = true;
  }

  // Flatness: last value against the checkpoint nearest to t_last / 4.
  const std::int64_t target = t_last / 4;
  std::size_t c0 = 0;
  for (std::size_t c = 0; c < C; ++c)
    if (std::llabs(series.checkpoints[c] - target) <
        std::llabs(series.checkpoints[c0] - target))
      c0 = c;
  sum.flatness_t0 = series.checkpoints[c0];
  sum.flatness_t1 = t_last;
  const Real x0 = series.x[static_cast<Index>(c0)];
  sum.flatness_ratio = x0 > 0 ? series.x[static_cast<Index>(C - 1)] / x0 : 0;
  sum.verdict_x = (sum.flatness_ratio > 0 && sum.flatness_ratio <= 2 &&
                   sum.flatness_ratio >= 0.5)
                      ? "flat within factor 2"
                      : "not flat within factor 2";

  // Sign profile of y past t = 1000.
  bool all_neg = true;
  int tail_points = 0;
  for (std::size_t c = 0; c < C; ++c) {
    if (series.checkpoints[c] < 1000) continue;
    ++tail_points;
    if (!(series.y[static_cast<Index>(c)] < 0)) all_neg = false;
  }
  sum.y_tail_points = tail_points;
  sum.y_all_negative_tail = tail_points > 0 && all_neg;
  sum.verdict_y = sum.y_all_negative_tail ? "converges from above" : "sign violations in tail";
  return sum;
}

}  // namespace tfs
