#include "ltfl/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ltfl::trace {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    while (pos < s.size() &&
           (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) {
      ++pos;
    }
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct UserAccumulator {
  double ratio_sum = 0.0;
  double received_sum = 0.0;
  double lost_sum = 0.0;
  double speed_sum = 0.0;
  std::size_t rows = 0;
};

}  // namespace

IngestResult ingest(const std::string& path, const TraceColumns& columns,
                    LossAggregation agg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trace: cannot open " + path);

  const int max_col =
      std::max({columns.user, columns.received, columns.lost, columns.speed});
  if (std::min({columns.user, columns.received, columns.lost,
                columns.speed}) < 0) {
    throw std::invalid_argument("trace: negative column index");
  }

  IngestResult result;
  std::map<std::string, UserAccumulator> users;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && columns.has_header) {
      first = false;
      continue;
    }
    first = false;
    if (trim(line).empty()) continue;

    const auto fields = split_csv_line(line);
    double received = 0.0;
    double lost = 0.0;
    double speed = 0.0;
    if (static_cast<int>(fields.size()) <= max_col ||
        !parse_double(trim(fields[columns.received]), &received) ||
        !parse_double(trim(fields[columns.lost]), &lost) ||
        !parse_double(trim(fields[columns.speed]), &speed)) {
      ++result.rows_skipped;
      continue;
    }
    const std::string user = trim(fields[columns.user]);
    // A row with no traffic carries no loss information; negative counts
    // or speeds are corrupt.
    if (user.empty() || received < 0.0 || lost < 0.0 || speed < 0.0 ||
        received + lost == 0.0) {
      ++result.rows_skipped;
      continue;
    }

    UserAccumulator& acc = users[user];
    acc.ratio_sum += lost / (received + lost);
    acc.received_sum += received;
    acc.lost_sum += lost;
    acc.speed_sum += speed;
    acc.rows += 1;
    ++result.rows_used;
  }

  if (users.empty()) {
    throw std::runtime_error("trace: no usable rows in " + path);
  }

  result.users.reserve(users.size());
  for (const auto& [id, acc] : users) {
    UserNetRecord rec;
    rec.user = id;
    if (agg == LossAggregation::kMeanOfRows) {
      rec.loss_ratio = acc.ratio_sum / static_cast<double>(acc.rows);
    } else {
      rec.loss_ratio = acc.lost_sum / (acc.received_sum + acc.lost_sum);
    }
    rec.upload_mbps = acc.speed_sum / static_cast<double>(acc.rows);
    result.users.push_back(std::move(rec));
  }
  return result;
}

std::vector<std::pair<double, double>> cdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cdf: no values");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> steps;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    steps.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return steps;
}

double cdf_at(const std::vector<std::pair<double, double>>& steps, double x) {
  double fraction = 0.0;
  for (const auto& [value, cum] : steps) {
    if (value > x) break;
    fraction = cum;
  }
  return fraction;
}

double eligible_ratio_at(const std::vector<UserNetRecord>& users,
                         double mbps_threshold) {
  if (users.empty()) {
    throw std::invalid_argument("eligible_ratio_at: no users");
  }
  std::size_t above = 0;
  for (const auto& u : users) {
    if (u.upload_mbps > mbps_threshold) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(users.size());
}

void write_cdf_csv(const std::vector<std::pair<double, double>>& steps,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace: cannot open " + path);
  out << "value,cum_fraction\n";
  char buf[64];
  for (const auto& [value, cum] : steps) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", value, cum);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("trace: write failed for " + path);
}

}  // namespace ltfl::trace
