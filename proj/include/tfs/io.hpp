#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tfs/epoch.hpp"
#include "tfs/experiments.hpp"
#include "tfs/learning.hpp"
#include "tfs/oracle.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// Shortest round-trip decimal rendering (%.17g), locale-independent.
std::string format_real(Real v);

std::uint64_t fnv1a64(std::string_view s);
std::string fnv1a64_hex(std::string_view s);

/// Binary-mode write: LF endings survive on every platform.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Comment lines are emitted as "# <line>"; pass the canonical config text
/// so every artifact records the configuration that produced it.
std::string trajectory_csv(const TlaRunResult& run, const std::vector<std::string>& comments);

std::string roc_csv(const RoCSeries& series, const std::vector<std::string>& comments);

std::string epoch_csv(const EpochRunResult& run, const std::vector<std::string>& comments);

struct SlotRecord {
  std::int64_t t = 0;
  Index selected = 0;
  Real utility = 0;
  Vec shares;
};

std::string slot_trace_csv(const std::vector<SlotRecord>& slots,
                           const std::vector<std::string>& comments);

/// Reference JSON embeds the solution, the canonical config text, and the
/// version string; parse_reference_json inverts the solution fields.
std::string reference_json(const ReferenceSolution& ref, const std::string& config_text,
                           const std::string& version);
ReferenceSolution parse_reference_json(const std::string& text);

/// Summary JSON for roc runs: fitted slope, verdicts, hashes.
std::string roc_summary_json(const RoCSummary& summary, const RoCSeries& series,
                             const std::string& config_hash, const std::string& config_text,
                             const std::string& version);

/// Final-state JSON for learn runs.
std::string learn_state_json(const TlaRunResult& run, const std::string& config_hash,
                             const std::string& config_text, const std::string& version);

/// Summary JSON for epoch runs.
std::string epoch_summary_json(const EpochRunResult& run, const EpochPlan& plan, Real u_star,
                               Real u_star_ci, const std::string& config_hash,
                               const std::string& config_text, const std::string& version);

}  // namespace tfs
