#include "ltfl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace ltfl {

namespace {

void check_config(const SyntheticConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0) {
    throw std::invalid_argument("dataset: alpha/beta must be >= 0");
  }
  if (cfg.num_clients < 1) {
    throw std::invalid_argument("dataset: num_clients < 1");
  }
  if (cfg.features < 1) throw std::invalid_argument("dataset: features < 1");
  if (cfg.classes < 2) throw std::invalid_argument("dataset: classes < 2");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw std::invalid_argument("dataset: train_fraction outside (0, 1)");
  }
  if (cfg.min_samples < 0) {
    throw std::invalid_argument("dataset: min_samples < 0");
  }
  if (cfg.sample_log_sigma < 0.0) {
    throw std::invalid_argument("dataset: sample_log_sigma < 0");
  }
}

ClientGenerator draw_generator(int features, int classes, double u,
                               double center, Rng& rng) {
  ClientGenerator g;
  g.w.resize(static_cast<std::size_t>(classes) * features);
  g.bias.resize(classes);
  g.v.resize(features);
  for (double& e : g.w) e = rng.normal(u, 1.0);
  for (double& e : g.bias) e = rng.normal(u, 1.0);
  for (double& e : g.v) e = rng.normal(center, 1.0);
  return g;
}

int label_of(const ClientGenerator& g, const double* x, int features,
             int classes) {
  int best = 0;
  double best_score = 0.0;
  for (int c = 0; c < classes; ++c) {
    double score = g.bias[c];
    const double* wc = g.w.data() + static_cast<std::size_t>(c) * features;
    for (int j = 0; j < features; ++j) score += wc[j] * x[j];
    if (c == 0 || score > best_score) {
      best = c;
      best_score = score;
    }
  }
  return best;
}

}  // namespace

SyntheticData gen_synthetic_full(const SyntheticConfig& cfg) {
  check_config(cfg);

  SyntheticData out;
  out.clients.reserve(cfg.num_clients);
  out.generators.reserve(cfg.num_clients);

  ClientGenerator shared;
  if (cfg.iid) {
    Rng shared_rng(cfg.seed, {kStreamDataShared});
    shared = draw_generator(cfg.features, cfg.classes, 0.0, 0.0, shared_rng);
  }

  // Per-feature sample noise: variance j^-1.2 on the j-th feature
  // (1-based), so later features are progressively quieter.
  std::vector<double> feature_std(cfg.features);
  for (int j = 0; j < cfg.features; ++j) {
    feature_std[j] = std::pow(static_cast<double>(j + 1), -0.6);
  }

  for (int k = 0; k < cfg.num_clients; ++k) {
    Rng rng(cfg.seed, {kStreamDataClient, static_cast<std::uint64_t>(k)});

    const double extra =
        rng.lognormal(cfg.sample_log_mean, cfg.sample_log_sigma);
    std::size_t n_k = static_cast<std::size_t>(cfg.min_samples) +
                      static_cast<std::size_t>(std::llround(extra));
    if (n_k < 2) n_k = 2;  // both splits must be non-empty

    ClientGenerator gen;
    if (cfg.iid) {
      gen = shared;
    } else {
      const double u = cfg.alpha * rng.normal();
      const double center = cfg.beta * rng.normal();
      gen = draw_generator(cfg.features, cfg.classes, u, center, rng);
    }

    DataMatrix x;
    x.rows = n_k;
    x.cols = static_cast<std::size_t>(cfg.features);
    x.values.resize(n_k * x.cols);
    std::vector<int> y(n_k);
    for (std::size_t i = 0; i < n_k; ++i) {
      double* xi = x.row(i);
      for (int j = 0; j < cfg.features; ++j) {
        xi[j] = gen.v[j] + feature_std[j] * rng.normal();
      }
      y[i] = label_of(gen, xi, cfg.features, cfg.classes);
    }

    // Deterministic split: leading samples train, the rest test.
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(n_k)));
    n_train = std::clamp<std::size_t>(n_train, 1, n_k - 1);

    ClientDataset ds;
    ds.client_id = k;
    ds.train.x.rows = n_train;
    ds.train.x.cols = x.cols;
    ds.train.x.values.assign(x.values.begin(),
                             x.values.begin() + n_train * x.cols);
    ds.train.y.assign(y.begin(), y.begin() + n_train);
    ds.test.x.rows = n_k - n_train;
    ds.test.x.cols = x.cols;
    ds.test.x.values.assign(x.values.begin() + n_train * x.cols,
                            x.values.end());
    ds.test.y.assign(y.begin() + n_train, y.end());

    out.clients.push_back(std::move(ds));
    out.generators.push_back(std::move(gen));
  }
  return out;
}

std::vector<ClientDataset> gen_synthetic(const SyntheticConfig& cfg) {
  return gen_synthetic_full(cfg).clients;
}

LabeledSet pooled_test_set(const std::vector<ClientDataset>& clients) {
  if (clients.empty()) {
    throw std::invalid_argument("pooled_test_set: no clients");
  }
  LabeledSet pooled;
  pooled.x.cols = clients.front().test.x.cols;
  for (const auto& c : clients) {
    if (c.test.x.cols != pooled.x.cols) {
      throw std::invalid_argument("pooled_test_set: feature width mismatch");
    }
    pooled.x.values.insert(pooled.x.values.end(), c.test.x.values.begin(),
                           c.test.x.values.end());
    pooled.y.insert(pooled.y.end(), c.test.y.begin(), c.test.y.end());
  }
  pooled.x.rows = pooled.y.size();
  return pooled;
}

void export_dataset_csv(const std::vector<ClientDataset>& clients,
                        const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write_set = [](const LabeledSet& set, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("export: cannot open " + path.string());
    }
    for (std::size_t j = 0; j < set.x.cols; ++j) out << "f" << j << ",";
    out << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double* row = set.x.row(i);
      for (std::size_t j = 0; j < set.x.cols; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
        out << buf << ",";
      }
      out << set.y[i] << "\n";
    }
  };
  for (const auto& c : clients) {
    const std::string stem = "client_" + std::to_string(c.client_id);
    write_set(c.train, fs::path(dir) / (stem + "_train.csv"));
    write_set(c.test, fs::path(dir) / (stem + "_test.csv"));
  }
}

}  // namespace ltfl
