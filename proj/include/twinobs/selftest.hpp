#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twinobs/operator_core.hpp"

namespace twinobs {

struct SelftestConfig {
  std::uint64_t seed = 20240611;
  int trials = 100;
  /// Largest local dimension drawn; composite dimensions stay <= 64.
  Index max_dim = 8;
  double tolerance = 1e-8;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  Tolerances tols;
};

/// One verified identity or inequality, aggregated over all instances.
struct TheoremRecord {
  std::string name;
  std::string statement;
  std::size_t instances_run = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  /// First few failing instances, "trial N: message".
  std::vector<std::string> failures;
};

struct TheoremReport {
  std::vector<TheoremRecord> records;
  std::uint64_t seed = 0;
  int trials = 0;
  Index max_dim = 0;
  double wall_time_seconds = 0.0;

  bool all_pass() const;
  /// Throws std::out_of_range for an unknown name.
  const TheoremRecord& record(const std::string& name) const;
};

/// Runs every check on `trials` independent random instances plus the
/// scripted golden cases. Trial t draws from seeds derived from
/// (seed, t), so the report does not depend on the thread count. Numerical
/// exceptions are recorded against the instance and do not stop the run.
TheoremReport run_selftest(const SelftestConfig& config);

}  // namespace twinobs
