#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tfs/channel.hpp"
#include "tfs/core.hpp"
#include "tfs/learning.hpp"
#include "tfs/sampler.hpp"
#include "tfs/types.hpp"

namespace tfs {

enum class Setting { oma, noma, synthetic };

/// Full run configuration. File format is a TOML-style key-value document
/// with [sections]; unknown sections or keys are rejected. Defaults
/// reproduce the reference protocol (n=4, radii 20/100 m, edge SNR 10 dB,
/// gamma_max=6, kappa=0.7, w=[0.1,0.2,0.3,0.4], horizon 5e6, reps 100).
struct RunConfig {
  // [run]
  Setting setting = Setting::oma;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all available cores
  std::string out_dir = "out";
  bool trace = false;
  // [cell] — n is shared by all settings
  CellConfig cell;
  // [synthetic]
  SyntheticKind synth_kind = SyntheticKind::uniform01;
  Real synth_mu = 1.0;
  // [demands]
  std::vector<Real> w = {0.1, 0.2, 0.3, 0.4};
  std::string demand_mode = "auto";  // auto | equality | lower_bound
  // [schedule]
  StepSchedule schedule;
  // [learn]
  std::int64_t horizon = 5'000'000;
  // [checkpoints]
  int per_decade = 50;
  std::int64_t t_min = 10;
  // [roc]
  int reps = 100;
  std::int64_t roc_horizon = 200'000;
  // [oracle]
  std::string method = "auto";  // auto | quantile | longrun
  std::int64_t batch = 1'000'000;
  Real tol = 1e-3;
  int max_iters = 200;
  std::int64_t u_batch = 1'000'000;
  std::int64_t t_ref = 5'000'000;
  std::string cache_dir;  // empty -> out_dir
  bool check_agreement = false;
  // [epoch]
  int epoch_m = 3;
  Real epoch_alpha_star = 0.5;
  int epoch_k = 12;
};

/// Parse config text (defaults for omitted keys). Throws ConfigError with
/// line numbers on syntax errors, unknown keys, or type mismatches.
RunConfig parse_config_text(const std::string& text);

/// Environment overrides: each key section.key can be overridden by
/// TFS_SECTION_KEY (e.g. TFS_CELL_EDGE_SNR_DB=7). Unrecognized TFS_*
/// variables are rejected like unknown keys.
void apply_env_overrides(RunConfig& cfg);

/// defaults -> file (if path nonempty) -> environment. Call validate() after
/// applying any CLI flag overrides.
RunConfig load_config(const std::string& path);

/// Cross-field validation of every module-level invariant reachable from the
/// config, including demand feasibility for the selected setting.
void validate(const RunConfig& cfg);

int setting_n_max(const RunConfig& cfg);             // oma/synthetic: 1, noma: 2
std::string setting_name(const RunConfig& cfg);      // "oma" | "noma" | "synthetic"
TlaMode resolved_mode(const RunConfig& cfg);         // auto: equality, noma -> lower_bound
std::string resolved_method(const RunConfig& cfg);   // "quantile_fixed_point" | "long_run_tla"
std::string resolved_cache_dir(const RunConfig& cfg);
int resolved_threads(const RunConfig& cfg);          // 0 -> hardware concurrency

DemandVector make_demands(const RunConfig& cfg);
std::unique_ptr<Sampler> make_sampler(const RunConfig& cfg);

/// Canonical rendering: every result-affecting key in fixed order, resolved
/// values, %.17g reals. Parsing it back yields an equivalent config
/// (idempotent). Execution-environment keys (threads, out_dir, cache_dir,
/// trace) are omitted so artifacts stay byte-identical across them.
std::string canonical_text(const RunConfig& cfg);
/// The sampling-setting subset (setting, seed, environment, demands,
/// schedule, oracle parameters) that a cached reference must match.
std::string setting_text(const RunConfig& cfg);

std::string config_hash(const RunConfig& cfg);   // fnv1a-64 hex of canonical_text
std::string setting_hash(const RunConfig& cfg);  // fnv1a-64 hex of setting_text

}  // namespace tfs
