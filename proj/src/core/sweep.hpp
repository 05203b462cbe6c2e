#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "metrics.hpp"

namespace hammer {

// One axis point expanded from a sweep request.
struct SweepPoint {
  std::string label;      // "message_length=4"
  std::string dir_name;   // filesystem-safe form of the label
  ExperimentConfig config;  // base config with the axis value applied (seed unset)
};

// Recognized axes: "message-length", "mode", "n-agents".
std::vector<SweepPoint> expand_axis(const ExperimentConfig& base, const std::string& axis,
                                    const std::vector<std::string>& values);

struct SweepOutcome {
  std::vector<AggregateResult> rows;       // one per axis point with >= 1 finished seed
  std::vector<std::string> failures;       // "label seed=s: reason"
  std::vector<std::string> run_dirs;       // finished runs, point-major then seed order
  std::string summary_path;
};

// Trains every (point, seed) cell under sweep_dir/<point>/<run>/, isolating
// per-cell failures, then aggregates final scores across seeds and writes
// summary.csv (and failures.txt when anything failed). Cell order and output
// are deterministic for any jobs count.
SweepOutcome run_sweep(const ExperimentConfig& base, const std::string& axis,
                       const std::vector<std::string>& values,
                       const std::vector<std::uint64_t>& seeds, const std::string& sweep_dir,
                       int jobs = 1, int score_window = 500);

// Cross-seed aggregation of already-finished run directories (each must hold
// metrics.csv + config.txt).
AggregateResult aggregate_run_dirs(const std::string& label,
                                   const std::vector<std::string>& run_dirs, int score_window);

}  // namespace hammer
