#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltfl/rng.hpp"

namespace ltfl {

// Row-major feature matrix.  Kept flat; samples are rows.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * cols; }
  double* row(std::size_t i) { return values.data() + i * cols; }
};

struct LabeledSet {
  DataMatrix x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

struct ClientDataset {
  int client_id = 0;
  LabeledSet train;
  LabeledSet test;
};

// Heterogeneous multinomial-logistic synthetic data.
//
// Client k draws a generating model W_k, b_k with entries N(u_k, 1),
// u_k ~ N(0, alpha^2), and a feature centre v_k with entries N(B_k, 1),
// B_k ~ N(0, beta^2).  Samples are x ~ N(v_k, Sigma) with
// Sigma_jj = j^-1.2 (1-based) and labels y = argmax(W_k x + b_k).
// alpha spreads the decision rules apart across clients, beta spreads the
// feature distributions.  iid mode shares a single generating model and
// centre (u = 0, B = 0) across all clients.
struct SyntheticConfig {
  double alpha = 1.0;
  double beta = 1.0;
  bool iid = false;
  int num_clients = 100;
  int features = 60;
  int classes = 10;
  double train_fraction = 0.8;
  int min_samples = 50;
  // Per-client sample counts: min_samples + round(lognormal(mu, sigma)).
  double sample_log_mean = 4.0;
  double sample_log_sigma = 2.0;
  std::uint64_t seed = 0;
};

// Generating model for one client, exposed for inspection and tests.
struct ClientGenerator {
  std::vector<double> w;     // classes x features, row-major
  std::vector<double> bias;  // classes
  std::vector<double> v;     // features
};

struct SyntheticData {
  std::vector<ClientDataset> clients;
  std::vector<ClientGenerator> generators;
};

SyntheticData gen_synthetic_full(const SyntheticConfig& cfg);
std::vector<ClientDataset> gen_synthetic(const SyntheticConfig& cfg);

// Concatenates every client's test set, in client order.
LabeledSet pooled_test_set(const std::vector<ClientDataset>& clients);

// One train and one test CSV per client, for offline inspection.
void export_dataset_csv(const std::vector<ClientDataset>& clients,
                        const std::string& dir);

}  // namespace ltfl
