// tfs — temporally-fair scheduling simulator.
//
// Subcommands:
//   learn   run the threshold learning algorithm, write trajectory + state
//   oracle  compute (or load from cache) the reference solution
//   roc     rate-of-convergence experiment across replications
//   epoch   doubling-epoch scheduler with frozen threshold snapshots
//   verify  run the acceptance suite
//
// Exit codes: 0 success, 2 config/feasibility error, 3 oracle
// non-convergence, 4 reference mismatch, 1 anything else.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "tfs/acceptance.hpp"
#include "tfs/commands.hpp"
#include "tfs/config.hpp"
#include "tfs/types.hpp"

namespace {

// Flag values shared by the run subcommands. CLI11 only writes into these
// when the flag is present, so "was it passed" is tracked per option and
// config-file / environment values survive unless explicitly overridden.
struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string setting;
  bool trace = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* setting_opt = nullptr;
  CLI::Option* trace_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Config file (key = value with [sections])")
      ->check(CLI::ExistingFile);
  f.seed_opt = cmd->add_option("--seed", f.seed, "Master RNG seed");
  f.threads_opt =
      cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
          ->check(CLI::Range(0, 4096));
  f.out_opt = cmd->add_option("--out", f.out, "Output directory");
  f.setting_opt = cmd->add_option("--setting", f.setting, "Scenario: oma, noma or synthetic")
                      ->check(CLI::IsMember({"oma", "noma", "synthetic"}));
  f.trace_opt = cmd->add_flag("--trace", f.trace, "Also export a per-slot trace CSV");
}

// defaults -> config file -> TFS_* environment -> command-line flags.
tfs::RunConfig resolve_config(const CommonFlags& f) {
  tfs::RunConfig cfg = tfs::load_config(f.config_path);
  if (f.setting_opt->count() > 0) {
    if (f.setting == "oma")
      cfg.setting = tfs::Setting::oma;
    else if (f.setting == "noma")
      cfg.setting = tfs::Setting::noma;
    else
      cfg.setting = tfs::Setting::synthetic;
  }
  if (f.seed_opt->count() > 0) cfg.seed = f.seed;
  if (f.threads_opt->count() > 0) cfg.threads = f.threads;
  if (f.out_opt->count() > 0) cfg.out_dir = f.out;
  if (f.trace_opt->count() > 0) cfg.trace = f.trace;
  tfs::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporally-fair multi-user scheduling simulator"};
  app.set_version_flag("--version", std::string(tfs::kVersion));
  app.require_subcommand(1);

  CommonFlags learn_f, oracle_f, roc_f, epoch_f;

  CLI::App* learn = app.add_subcommand("learn", "Run threshold learning");
  add_common_flags(learn, learn_f);

  CLI::App* oracle = app.add_subcommand("oracle", "Compute the reference solution");
  add_common_flags(oracle, oracle_f);
  std::string method;
  CLI::Option* method_opt =
      oracle->add_option("--method", method, "Reference method: auto, quantile or longrun")
          ->check(CLI::IsMember({"auto", "quantile", "longrun"}));
  bool check_agreement = false;
  CLI::Option* agree_opt = oracle->add_flag(
      "--check-agreement", check_agreement,
      "Re-run the fixed point from a perturbed start and require agreement");

  CLI::App* roc = app.add_subcommand("roc", "Rate-of-convergence experiment");
  add_common_flags(roc, roc_f);

  CLI::App* epoch = app.add_subcommand("epoch", "Doubling-epoch scheduler");
  add_common_flags(epoch, epoch_f);
  int epoch_m = 0;
  double epoch_alpha = 0.0;
  int epoch_k = 0;
  CLI::Option* m_opt = epoch->add_option("--M", epoch_m, "Epoch growth base (>= 3)");
  CLI::Option* a_opt = epoch->add_option("--alpha-star", epoch_alpha, "Learning exponent in (0,1/2]");
  CLI::Option* k_opt = epoch->add_option("--K", epoch_k, "Number of epochs");

  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
  tfs::AcceptanceOptions acc;
  verify->add_flag("--ci", acc.ci_mode, "Reduced replication count with widened flatness factor");
  verify->add_option("--threads", acc.threads, "Worker threads for the experiments")
      ->check(CLI::Range(1, 4096));
  verify->add_option("--out", acc.work_dir, "Scratch directory for acceptance artifacts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (learn->parsed()) return tfs::cmd_learn(resolve_config(learn_f));
    if (oracle->parsed()) {
      tfs::RunConfig cfg = resolve_config(oracle_f);
      if (method_opt->count() > 0) cfg.method = method;
      if (agree_opt->count() > 0) cfg.check_agreement = check_agreement;
      return tfs::cmd_oracle(cfg);
    }
    if (roc->parsed()) return tfs::cmd_roc(resolve_config(roc_f));
    if (epoch->parsed()) {
      tfs::RunConfig cfg = resolve_config(epoch_f);
      if (m_opt->count() > 0) cfg.epoch_m = epoch_m;
      if (a_opt->count() > 0) cfg.epoch_alpha_star = epoch_alpha;
      if (k_opt->count() > 0) cfg.epoch_k = epoch_k;
      return tfs::cmd_epoch(cfg);
    }
    if (verify->parsed()) {
      const int failed = tfs::run_acceptance(acc);
      return failed == 0 ? 0 : 1;
    }
  } catch (const tfs::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const tfs::OracleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const tfs::ReferenceMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
