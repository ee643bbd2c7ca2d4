#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ltfl::trace {

// Ingest of measurement-campaign CSVs: one row per (user, measurement),
// with packet counts and an upload speed.  Column positions are
// configurable because these exports vary.
struct TraceColumns {
  int user = 0;
  int received = 1;
  int lost = 2;
  int speed = 3;
  bool has_header = true;
};

// How multiple rows of one user combine into one loss ratio: average the
// per-row ratios (each measurement counts equally) or pool the packet
// counts first (each packet counts equally).
enum class LossAggregation { kMeanOfRows, kPooled };

struct UserNetRecord {
  std::string user;
  double loss_ratio = 0.0;   // in [0, 1]
  double upload_mbps = 0.0;  // mean over the user's rows
};

struct IngestResult {
  std::vector<UserNetRecord> users;  // sorted by user id
  std::size_t rows_used = 0;
  std::size_t rows_skipped = 0;  // malformed, negative, or zero-traffic
};

// Throws std::runtime_error if the file is missing or contains no usable
// rows.  Rows it cannot use are counted, not fatal.
IngestResult ingest(const std::string& path, const TraceColumns& columns = {},
                    LossAggregation agg = LossAggregation::kMeanOfRows);

// Empirical CDF: one (value, fraction <= value) step per distinct value,
// ascending, ending at 1.  Empty input is an error.
std::vector<std::pair<double, double>> cdf(std::vector<double> values);

// Fraction of values <= x under the step function.
double cdf_at(const std::vector<std::pair<double, double>>& steps, double x);

// Fraction of users with upload speed strictly above the threshold.
double eligible_ratio_at(const std::vector<UserNetRecord>& users,
                         double mbps_threshold);

// Two-column CSV: value,cum_fraction.
void write_cdf_csv(const std::vector<std::pair<double, double>>& steps,
                   const std::string& path);

}  // namespace ltfl::trace
