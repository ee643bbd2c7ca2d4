#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ltfl {

// Accuracy spread across clients.  All values are percentages; variance is
// population variance in percentage-points squared.  The top/bottom decile
// holds ceil(N / 10) clients.
struct FairnessStats {
  double average = 0.0;
  double best10 = 0.0;
  double worst10 = 0.0;
  double variance = 0.0;
};

FairnessStats fairness_stats(const std::vector<double>& per_client_acc);

struct RoundRecord {
  int round = 0;
  double sample_acc = 0.0;       // pooled-test accuracy of the global model
  double avg_client_acc = 0.0;   // mean per-client accuracy, own test sets
  double best10 = 0.0;
  double worst10 = 0.0;
  double variance = 0.0;
  std::optional<double> personalized_acc;  // personal models, own test sets
  std::optional<double> global_acc;        // global model, same evaluation
  std::optional<double> sim_time;          // seconds, slowest upload
};

// Header plus one row per record, numeric cells with four decimals and
// empty cells for absent optionals.  Byte-stable across reruns.
void emit_csv(const std::vector<RoundRecord>& records,
              const std::string& path);

std::string csv_header();
std::string csv_row(const RoundRecord& rec);

struct SummaryRow {
  double sample_acc = 0.0;
  FairnessStats fairness;
};

// Final-round snapshot of a run.
SummaryRow summarize_final(const std::vector<RoundRecord>& records);

// Shared fixed-point formatting, 4 decimals.
std::string format_fixed(double v);

}  // namespace ltfl
