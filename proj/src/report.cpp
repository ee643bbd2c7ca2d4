#include "ltfl/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ltfl {

FairnessStats fairness_stats(const std::vector<double>& per_client_acc) {
  if (per_client_acc.empty()) {
    throw std::invalid_argument("fairness_stats: no clients");
  }
  const std::size_t n = per_client_acc.size();
  // Integer decile avoids 0.1 * n landing on either side of an integer.
  const std::size_t decile = (n + 9) / 10;

  std::vector<double> sorted = per_client_acc;
  std::sort(sorted.begin(), sorted.end());

  FairnessStats stats;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  stats.average = sum / static_cast<double>(n);

  double worst_sum = 0.0;
  double best_sum = 0.0;
  for (std::size_t i = 0; i < decile; ++i) {
    worst_sum += sorted[i];
    best_sum += sorted[n - 1 - i];
  }
  stats.worst10 = worst_sum / static_cast<double>(decile);
  stats.best10 = best_sum / static_cast<double>(decile);

  double var = 0.0;
  for (double v : sorted) {
    const double d = v - stats.average;
    var += d * d;
  }
  stats.variance = var / static_cast<double>(n);
  return stats;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string csv_header() {
  return "round,sample_acc,avg_client_acc,best10,worst10,variance,"
         "personalized_acc,global_acc,sim_time";
}

std::string csv_row(const RoundRecord& rec) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_fixed(*v) : std::string();
  };
  std::string row = std::to_string(rec.round);
  row += "," + format_fixed(rec.sample_acc);
  row += "," + format_fixed(rec.avg_client_acc);
  row += "," + format_fixed(rec.best10);
  row += "," + format_fixed(rec.worst10);
  row += "," + format_fixed(rec.variance);
  row += "," + opt(rec.personalized_acc);
  row += "," + opt(rec.global_acc);
  row += "," + opt(rec.sim_time);
  return row;
}

void emit_csv(const std::vector<RoundRecord>& records,
              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << csv_header() << "\n";
  for (const auto& rec : records) out << csv_row(rec) << "\n";
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

SummaryRow summarize_final(const std::vector<RoundRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("summarize_final: no records");
  }
  const RoundRecord& last = records.back();
  SummaryRow row;
  row.sample_acc = last.sample_acc;
  row.fairness.average = last.avg_client_acc;
  row.fairness.best10 = last.best10;
  row.fairness.worst10 = last.worst10;
  row.fairness.variance = last.variance;
  return row;
}

}  // namespace ltfl
