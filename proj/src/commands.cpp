#include "tfs/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tfs/epoch.hpp"
#include "tfs/experiments.hpp"
#include "tfs/io.hpp"

namespace tfs {

namespace {

std::vector<std::string> artifact_comments(const RunConfig& cfg) {
  std::vector<std::string> lines;
  lines.push_back(std::string(kVersion));
  lines.push_back("config_hash = " + config_hash(cfg));
  lines.push_back("setting_hash = " + setting_hash(cfg));
  lines.push_back("config:");
  std::stringstream ss(canonical_text(cfg));
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

// Streams the per-slot trace straight to disk; full traces do not fit in
// memory at 5e6 slots.
class CsvTraceWriter final : public SlotObserver {
 public:
  CsvTraceWriter(const std::string& path, int n, const std::vector<std::string>& comments)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open for writing: " + path);
    std::string head;
    for (const auto& line : comments) head += "# " + line + "\n";
    head += "t,selected_j,utility";
    for (int i = 1; i <= n; ++i) head += ",share_" + std::to_string(i);
    head += '\n';
    out_ << head;
  }

  void on_slot(std::int64_t t, Index selected, Real utility, const ShareLedger& ledger) override {
    std::string row = std::to_string(t);
    row += ',';
    row += std::to_string(selected + 1);
    row += ',';
    row += format_real(utility);
    const Vec shares = ledger.shares();
    for (Index i = 0; i < shares.size(); ++i) {
      row += ',';
      row += format_real(shares[i]);
    }
    row += '\n';
    out_ << row;
  }

 private:
  std::ofstream out_;
};

ReferenceSolution compute_reference(const RunConfig& cfg) {
  std::unique_ptr<Sampler> sampler = make_sampler(cfg);
  const DemandVector demands = make_demands(cfg);
  ReferenceSolution ref;
  if (resolved_method(cfg) == "quantile_fixed_point") {
    QfpOptions opt;
    opt.batch = cfg.batch;
    opt.tol = cfg.tol;
    opt.max_iters = cfg.max_iters;
    opt.u_batch = cfg.u_batch;
    opt.check_agreement = cfg.check_agreement;
    ref = quantile_fixed_point(*sampler, demands, opt, cfg.seed);
  } else {
    ref = long_run_reference(*sampler, demands, cfg.schedule, resolved_mode(cfg), cfg.t_ref,
                             cfg.seed);
  }
  ref.setting_hash = setting_hash(cfg);
  return ref;
}

}  // namespace

std::string reference_cache_path(const RunConfig& cfg) {
  const std::string short_method =
      resolved_method(cfg) == "quantile_fixed_point" ? "quantile" : "longrun";
  return resolved_cache_dir(cfg) + "/ref_" + setting_hash(cfg) + "_" + short_method + ".json";
}

ReferenceSolution get_reference(const RunConfig& cfg, bool require_converged) {
  const std::string path = reference_cache_path(cfg);
  const std::string expect = setting_hash(cfg);
  if (std::filesystem::exists(path)) {
    ReferenceSolution ref = parse_reference_json(read_text_file(path));
    if (ref.setting_hash != expect)
      throw ReferenceMismatch("cached reference " + path + " carries setting hash " +
                              ref.setting_hash + ", expected " + expect);
    const bool needs_multistart = cfg.check_agreement && !ref.multistart_checked;
    if (!needs_multistart) {
      if (require_converged && !ref.converged)
        throw OracleError("cached reference " + path + " is flagged non-converged");
      std::printf("reference: cache hit %s\n", path.c_str());
      return ref;
    }
  }
  ReferenceSolution ref = compute_reference(cfg);
  ensure_dir(resolved_cache_dir(cfg));
  write_text_file(path, reference_json(ref, canonical_text(cfg), kVersion));
  std::printf("reference: computed (%s), cached at %s\n", ref.method.c_str(), path.c_str());
  if (require_converged && !ref.converged)
    throw OracleError("oracle failed to converge after " + std::to_string(ref.sweeps_used) +
                      " sweeps; diagnostic written to " + path);
  return ref;
}

int cmd_learn(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.out_dir);
  std::unique_ptr<Sampler> sampler = make_sampler(cfg);
  const DemandVector demands = make_demands(cfg);
  const std::vector<std::int64_t> cps = geometric_checkpoints(
      std::min(cfg.t_min, cfg.horizon), cfg.horizon, cfg.per_decade);
  Rng rng = Rng::substream(cfg.seed, StreamTag::replication, 0);
  const std::string h = config_hash(cfg);
  const std::vector<std::string> comments = artifact_comments(cfg);

  std::unique_ptr<CsvTraceWriter> tracer;
  if (cfg.trace)
    tracer = std::make_unique<CsvTraceWriter>(out_path(cfg, "learn_" + h + "_trace.csv"),
                                              cfg.cell.n, comments);
  const TlaRunResult run = run_tla(*sampler, demands, cfg.schedule, resolved_mode(cfg),
                                   cfg.horizon, cps, rng, tracer.get());

  const std::string traj_path = out_path(cfg, "learn_" + h + "_trajectory.csv");
  write_text_file(traj_path, trajectory_csv(run, comments));
  const std::string state_path = out_path(cfg, "learn_" + h + "_state.json");
  write_text_file(state_path, learn_state_json(run, h, canonical_text(cfg), kVersion));

  Real max_gap = 0;
  for (Index i = 0; i < run.final_shares.size(); ++i)
    max_gap = std::max(max_gap, std::abs(run.final_shares[i] - demands.w_lower[i]));
  std::printf("learn: %s, T=%lld, avg_utility=%s, max|A-w|=%s\n", setting_name(cfg).c_str(),
              static_cast<long long>(cfg.horizon), format_real(run.final_avg_utility).c_str(),
              format_real(max_gap).c_str());
  std::printf("wrote %s\n", traj_path.c_str());
  std::printf("wrote %s\n", state_path.c_str());
  if (cfg.trace) std::printf("wrote %s\n", out_path(cfg, "learn_" + h + "_trace.csv").c_str());
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.out_dir);
  const ReferenceSolution ref = get_reference(cfg, /*require_converged=*/false);
  std::string lam = "[";
  for (Index i = 0; i < ref.lambda_star.size(); ++i)
    lam += (i ? ", " : "") + format_real(ref.lambda_star[i]);
  lam += "]";
  std::printf("oracle: method=%s converged=%s\n", ref.method.c_str(),
              ref.converged ? "true" : "false");
  std::printf("lambda_star = %s\n", lam.c_str());
  std::printf("u_star = %s (ci_halfwidth %s, budget %lld)\n", format_real(ref.u_star).c_str(),
              format_real(ref.ci_halfwidth).c_str(), static_cast<long long>(ref.sample_budget));
  if (ref.multistart_checked)
    std::printf("multistart agreement: %s (max dev %s)\n", ref.multistart_agrees ? "pass" : "FAIL",
                format_real(ref.multistart_max_dev).c_str());
  if (!ref.converged) {
    std::fprintf(stderr, "oracle: quantile iteration did not converge within %d sweeps\n",
                 ref.sweeps_used);
    return 3;
  }
  return 0;
}

int cmd_roc(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.out_dir);
  const ReferenceSolution ref = get_reference(cfg, /*require_converged=*/true);
  std::unique_ptr<Sampler> sampler = make_sampler(cfg);
  const DemandVector demands = make_demands(cfg);

  RocOptions opt;
  opt.reps = cfg.reps;
  opt.horizon = cfg.roc_horizon;
  opt.checkpoints =
      geometric_checkpoints(std::min(cfg.t_min, cfg.roc_horizon), cfg.roc_horizon, cfg.per_decade);
  opt.master_seed = cfg.seed;
  opt.threads = resolved_threads(cfg);
  opt.setting_name = setting_name(cfg);
  opt.expected_setting_hash = setting_hash(cfg);
  const RoCSeries series =
      roc_experiment(*sampler, demands, cfg.schedule, resolved_mode(cfg), ref, opt);
  const RoCSummary summary = summarize(series);

  const std::string h = config_hash(cfg);
  const std::vector<std::string> comments = artifact_comments(cfg);
  const std::string csv_path = out_path(cfg, "roc_" + h + ".csv");
  write_text_file(csv_path, roc_csv(series, comments));
  const std::string sum_path = out_path(cfg, "roc_" + h + "_summary.json");
  write_text_file(sum_path, roc_summary_json(summary, series, h, canonical_text(cfg), kVersion));

  std::printf("roc: %s, reps=%d, horizon=%lld\n", setting_name(cfg).c_str(), series.reps,
              static_cast<long long>(cfg.roc_horizon));
  if (summary.slope_available)
    std::printf("slope = %s, flatness x(%lld)/x(%lld) = %s\n", format_real(summary.slope).c_str(),
                static_cast<long long>(summary.flatness_t1),
                static_cast<long long>(summary.flatness_t0),
                format_real(summary.flatness_ratio).c_str());
  else
    std::printf("slope: %s\n", summary.slope_warning.c_str());
  std::printf("y_t: %s\n", summary.verdict_y.c_str());
  std::printf("wrote %s\n", csv_path.c_str());
  std::printf("wrote %s\n", sum_path.c_str());
  return 0;
}

int cmd_epoch(const RunConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.out_dir);
  const EpochPlan plan = build_epoch_plan(cfg.epoch_m, cfg.epoch_alpha_star, cfg.epoch_k);
  const ReferenceSolution ref = get_reference(cfg, /*require_converged=*/true);
  std::unique_ptr<Sampler> sampler = make_sampler(cfg);
  const DemandVector demands = make_demands(cfg);
  const std::vector<std::int64_t> cps = geometric_checkpoints(
      std::min(cfg.t_min, plan.total_slots), plan.total_slots, cfg.per_decade);
  Rng rng = Rng::substream(cfg.seed, StreamTag::epoch, 0);
  const EpochRunResult run =
      run_epoch_scheduler(*sampler, demands, plan, cfg.schedule, resolved_mode(cfg), cps, rng);

  const std::string h = config_hash(cfg);
  const std::vector<std::string> comments = artifact_comments(cfg);
  const std::string csv_path = out_path(cfg, "epoch_" + h + ".csv");
  write_text_file(csv_path, epoch_csv(run, comments));
  const std::string sum_path = out_path(cfg, "epoch_" + h + "_summary.json");
  write_text_file(sum_path, epoch_summary_json(run, plan, ref.u_star, ref.ci_halfwidth, h,
                                               canonical_text(cfg), kVersion));

  std::printf("epoch: M=%d alpha_star=%s K=%d, total_slots=%lld\n", plan.M,
              format_real(plan.alpha_star).c_str(), plan.K,
              static_cast<long long>(plan.total_slots));
  std::printf("final avg_utility=%s vs u_star=%s\n", format_real(run.final_avg_utility).c_str(),
              format_real(ref.u_star).c_str());
  std::printf("wrote %s\n", csv_path.c_str());
  std::printf("wrote %s\n", sum_path.c_str());
  return 0;
}

}  // namespace tfs
