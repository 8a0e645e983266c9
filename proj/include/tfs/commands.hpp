#pragma once

#include <string>

#include "tfs/config.hpp"
#include "tfs/oracle.hpp"

namespace tfs {

/// Subcommand bodies. Each validates the config, runs the corresponding
/// module, writes its artifacts under cfg.out_dir (file names keyed by the
/// config hash), prints a short summary to stdout, and returns the process
/// exit code: 0 on success, 3 when an oracle failed to converge. Config and
/// reference errors are thrown (ConfigError -> 2, ReferenceMismatch -> 4).
int cmd_learn(const RunConfig& cfg);
int cmd_oracle(const RunConfig& cfg);
int cmd_roc(const RunConfig& cfg);
int cmd_epoch(const RunConfig& cfg);

/// Loads the reference for cfg's setting from the cache (validating its
/// embedded setting hash) or computes and caches it. Throws OracleError if
/// a freshly computed quantile iteration fails to converge and
/// require_converged is set.
ReferenceSolution get_reference(const RunConfig& cfg, bool require_converged);

/// Cache file path for cfg's reference.
std::string reference_cache_path(const RunConfig& cfg);

}  // namespace tfs
