#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hammer {

// One learning-curve row. Loss fields are empty on episodes where the
// corresponding learner did not update; wall_ms is measured time and is the
// only field exempt from determinism comparisons.
struct MetricsRow {
  int episode = 0;
  double mean_reward_per_agent = 0.0;
  int collisions = 0;
  std::optional<double> central_loss;
  std::optional<double> local_loss;
  std::optional<double> entropy;
  std::int64_t wall_ms = 0;
};

inline constexpr const char* kMetricsHeader =
    "episode,mean_reward_per_agent,collisions,central_loss,local_loss,entropy,wall_ms";

// Reals are written with 17 significant digits so that write/read round-trips
// bit-exactly; empty fields stay empty.
void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> read_metrics(const std::string& path);  // errors carry line numbers
std::string metrics_row_line(const MetricsRow& row);

// Trailing mean over a window: out[i] = mean(values[max(0,i-w+1) .. i]).
std::vector<double> rolling_mean(const std::vector<double>& values, int window);

std::vector<double> reward_column(const std::vector<MetricsRow>& rows);

// Mean reward over the last min(window, n) episodes; the scalar each run
// contributes to cross-seed aggregates.
double final_score(const std::vector<MetricsRow>& rows, int window);

struct AggregateResult {
  std::string label;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std (n-1 denominator) / sqrt(n); 0 for n < 2
  std::string fingerprint;
};

AggregateResult aggregate_scores(const std::string& label, const std::vector<double>& per_seed,
                                 const std::string& fingerprint);

inline constexpr const char* kSummaryHeader = "label,seeds,mean,stderr,fingerprint";
void write_summary_csv(const std::vector<AggregateResult>& rows, const std::string& path);

}  // namespace hammer
