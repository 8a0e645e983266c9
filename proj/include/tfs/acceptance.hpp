#pragma once

#include <cstdint>
#include <string>

namespace tfs {

struct AcceptanceOptions {
  bool ci_mode = false;  // criterion 4 runs reps=20 with flatness factor 2.5
  int threads = 1;
  std::string work_dir = "acceptance_out";
};

/// Runs the ten acceptance criteria, printing one [PASS]/[FAIL] line per
/// criterion with the measured values against their thresholds. Returns the
/// number of failed criteria.
int run_acceptance(const AcceptanceOptions& opt);

}  // namespace tfs
