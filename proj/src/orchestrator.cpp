#include "ltfl/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace ltfl {

namespace {

ModelSpec model_spec_of(const ExperimentConfig& cfg) {
  ModelSpec spec;
  spec.kind = cfg.model_kind;
  spec.features = cfg.dataset.features;
  spec.classes = cfg.dataset.classes;
  spec.hidden_units = cfg.model_kind == ModelKind::kMlp ? cfg.hidden_units : 0;
  return spec;
}

std::uint64_t resolved_dataset_seed(const ExperimentConfig& cfg) {
  if (cfg.dataset_seed_explicit) return cfg.dataset.seed;
  return derive_key(cfg.seed, {kStreamDataset});
}

double percent(double fraction) { return 100.0 * fraction; }

// Evaluates the current models into one record.  Personal models are
// reported only for pfedme, where they exist.
RoundRecord make_record(int round, const ExperimentConfig& cfg,
                        const ModelSpec& spec, const ServerState& state,
                        const std::vector<ClientDataset>& data,
                        const LabeledSet& pooled_test,
                        std::optional<double> sim_time) {
  RoundRecord rec;
  rec.round = round;
  rec.sample_acc = percent(evaluate_accuracy(spec, state.w, pooled_test));

  std::vector<double> client_acc;
  client_acc.reserve(data.size());
  for (const auto& c : data) {
    client_acc.push_back(percent(evaluate_accuracy(spec, state.w, c.test)));
  }
  const FairnessStats stats = fairness_stats(client_acc);
  rec.avg_client_acc = stats.average;
  rec.best10 = stats.best10;
  rec.worst10 = stats.worst10;
  rec.variance = stats.variance;

  if (cfg.algorithm == Algorithm::kPfedme) {
    double personalized = 0.0;
    for (const auto& c : data) {
      personalized += percent(
          evaluate_accuracy(spec, state.thetas[c.client_id], c.test));
    }
    rec.personalized_acc = personalized / static_cast<double>(data.size());
    rec.global_acc = rec.avg_client_acc;
  }
  rec.sim_time = sim_time;
  return rec;
}

double payload_bytes_of(const ExperimentConfig& cfg, const ModelSpec& spec) {
  if (cfg.upload && cfg.upload->payload_bytes) {
    return *cfg.upload->payload_bytes;
  }
  return 8.0 * static_cast<double>(spec.dim());
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.rounds < 0) throw std::invalid_argument("config: rounds < 0");
  if (cfg.clients_per_round < 1) {
    throw std::invalid_argument("config: clients_per_round < 1");
  }
  if (!(cfg.eligible_ratio > 0.0 && cfg.eligible_ratio <= 1.0)) {
    throw std::invalid_argument("config: eligible_ratio outside (0, 1]");
  }
  if (!(cfg.loss_ratio >= 0.0 && cfg.loss_ratio < 1.0)) {
    throw std::invalid_argument("config: loss_ratio outside [0, 1)");
  }
  if (cfg.packet_size < 1) {
    throw std::invalid_argument("config: packet_size < 1");
  }
  if (cfg.train.learning_rate < 0.0) {
    throw std::invalid_argument("config: negative learning_rate");
  }
  if (cfg.train.epochs < 1) throw std::invalid_argument("config: epochs < 1");
  if (cfg.train.batch_size < 1) {
    throw std::invalid_argument("config: batch_size < 1");
  }
  if (cfg.qffl.q < 0.0) throw std::invalid_argument("config: qffl.q < 0");
  if (cfg.qffl.lipschitz <= 0.0) {
    throw std::invalid_argument("config: qffl.lipschitz <= 0");
  }
  if (!(cfg.pfedme.beta > 0.0 && cfg.pfedme.beta <= 2.0)) {
    throw std::invalid_argument("config: pfedme.beta outside (0, 2]");
  }
  if (cfg.pfedme.lambda <= 0.0) {
    throw std::invalid_argument("config: pfedme.lambda <= 0");
  }
  if (cfg.pfedme.inner_steps < 1 || cfg.pfedme.local_rounds < 1 ||
      cfg.pfedme.batch_size < 1) {
    throw std::invalid_argument("config: pfedme counts must be >= 1");
  }
  if (cfg.model_kind == ModelKind::kMlp && cfg.hidden_units < 1) {
    throw std::invalid_argument("config: hidden_units < 1");
  }
  if (cfg.upload) {
    if (cfg.upload->sufficient_mbps <= 0.0 ||
        cfg.upload->insufficient_mbps <= 0.0) {
      throw std::invalid_argument("config: upload speeds must be > 0");
    }
    if (cfg.upload->payload_bytes && *cfg.upload->payload_bytes <= 0.0) {
      throw std::invalid_argument("config: payload_bytes <= 0");
    }
  }
}

std::vector<int> select_clients(SelectionPolicy policy,
                                const std::vector<NetworkProfile>& profiles,
                                int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("select_clients: k < 1");
  std::vector<int> pool;
  pool.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (policy == SelectionPolicy::kAdmitAll || p.sufficient) {
      pool.push_back(p.client_id);
    }
  }
  if (pool.empty()) {
    throw std::runtime_error(
        "select_clients: no eligible clients under this policy");
  }
  std::sort(pool.begin(), pool.end());
  if (static_cast<std::size_t>(k) >= pool.size()) return pool;
  std::vector<int> chosen = rng.sample(pool, static_cast<std::size_t>(k));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ServerState init_experiment(const ExperimentConfig& cfg,
                            const std::vector<ClientDataset>& data) {
  validate_config(cfg);
  if (data.size() != static_cast<std::size_t>(cfg.dataset.num_clients)) {
    throw std::invalid_argument("init_experiment: dataset size mismatch");
  }

  ServerState state;
  // Sufficiency reports come in once, before any selection: profiles are
  // fixed here for the whole run.
  Rng profile_rng(cfg.seed, {kStreamProfiles});
  state.profiles = assign_profiles(cfg.dataset.num_clients,
                                   cfg.eligible_ratio, cfg.loss_ratio,
                                   profile_rng);
  if (cfg.upload) {
    for (auto& p : state.profiles) {
      p.upload_mbps = p.sufficient ? cfg.upload->sufficient_mbps
                                   : cfg.upload->insufficient_mbps;
    }
  }

  const ModelSpec spec = model_spec_of(cfg);
  state.w = init_params(spec, derive_key(cfg.seed, {kStreamModelInit}));
  if (cfg.algorithm == Algorithm::kPfedme) {
    state.thetas.assign(data.size(), state.w);
    state.pending_local_w.assign(data.size(), state.w);
  }
  state.round = 0;
  return state;
}

RoundRecord run_round(ServerState& state, const ExperimentConfig& cfg,
                      const std::vector<ClientDataset>& data,
                      const LabeledSet& pooled_test) {
  if (state.profiles.empty()) {
    throw std::runtime_error(
        "run_round: no sufficiency reports (init_experiment must run first)");
  }
  const ModelSpec spec = model_spec_of(cfg);
  const int t = ++state.round;
  const SelectionPolicy policy = cfg.tra ? SelectionPolicy::kAdmitAll
                                         : SelectionPolicy::kThresholdBiased;

  Rng select_rng(cfg.seed, {kStreamSelect, static_cast<std::uint64_t>(t)});
  const std::vector<int> selected = select_clients(
      policy, state.profiles, cfg.clients_per_round, select_rng);

  // pfedme trains every client each round; selection gates uploads only.
  // The other algorithms train the selected clients only.
  if (cfg.algorithm == Algorithm::kPfedme) {
    for (const auto& c : data) {
      Rng train_rng(cfg.seed, {kStreamTrain, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(c.client_id)});
      PfedmeLocalResult local = pfedme_local(state.w, spec, c.train,
                                             cfg.pfedme, train_rng);
      state.thetas[c.client_id] = std::move(local.theta);
      state.pending_local_w[c.client_id] = std::move(local.local_w);
    }
  }

  std::vector<ClientUpdate> updates;
  updates.reserve(selected.size());
  for (int id : selected) {
    const ClientDataset& client = data[id];
    ParamVector trained;
    double initial_loss = 0.0;
    if (cfg.algorithm == Algorithm::kPfedme) {
      trained = state.pending_local_w[id];
    } else {
      Rng train_rng(cfg.seed, {kStreamTrain, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(id)});
      TrainResult tr =
          local_train(state.w, spec, client.train, cfg.train, train_rng);
      trained = std::move(tr.params);
      initial_loss = tr.initial_loss;
    }

    Rng net_rng(cfg.seed, {kStreamNet, static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(id)});
    const NetworkProfile& profile = state.profiles[id];
    TransmitResult sent = transmit(trained, profile, cfg.packet_size, net_rng);

    ClientUpdate u;
    u.client_id = id;
    u.params = std::move(sent.received);
    u.num_samples = client.train.size();
    u.local_loss = initial_loss;
    u.sufficient = profile.sufficient;
    u.nominal_loss_ratio = profile.loss_ratio;
    u.realized_drop_fraction = sent.drop_fraction;
    updates.push_back(std::move(u));
  }

  switch (cfg.algorithm) {
    case Algorithm::kFedAvg:
      state.w = cfg.tra ? tra_fedavg_aggregate(updates, cfg.compensation,
                                               cfg.aggregation_form)
                        : fedavg_aggregate(updates);
      break;
    case Algorithm::kQFedAvg:
      state.w = cfg.tra
                    ? tra_qffl_step(state.w, updates, cfg.qffl,
                                    cfg.compensation)
                    : qffl_step(state.w, updates, cfg.qffl);
      break;
    case Algorithm::kPfedme:
      state.w = pfedme_server_step(state.w, updates, cfg.pfedme.beta,
                                   cfg.tra, cfg.compensation);
      break;
  }
  if (!all_finite(state.w)) {
    throw std::runtime_error("run_round: global model diverged in round " +
                             std::to_string(t));
  }

  std::optional<double> sim_time;
  if (cfg.upload) {
    std::vector<NetworkProfile> selected_profiles;
    selected_profiles.reserve(selected.size());
    for (int id : selected) selected_profiles.push_back(state.profiles[id]);
    sim_time = round_time(selected_profiles, payload_bytes_of(cfg, spec),
                          cfg.tra ? TimeModel::kZeroFill
                                  : TimeModel::kRetransmit);
  }

  return make_record(t, cfg, spec, state, data, pooled_test, sim_time);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  SyntheticConfig dcfg = cfg.dataset;
  dcfg.seed = resolved_dataset_seed(cfg);
  const std::vector<ClientDataset> data = gen_synthetic(dcfg);
  const LabeledSet pooled = pooled_test_set(data);

  ServerState state = init_experiment(cfg, data);
  const ModelSpec spec = model_spec_of(cfg);

  ExperimentResult result;
  result.records.reserve(static_cast<std::size_t>(cfg.rounds) + 1);
  result.records.push_back(
      make_record(0, cfg, spec, state, data, pooled, std::nullopt));
  for (int t = 0; t < cfg.rounds; ++t) {
    result.records.push_back(run_round(state, cfg, data, pooled));
  }
  return result;
}

std::string algorithm_label(Algorithm a, bool tra) {
  std::string base;
  switch (a) {
    case Algorithm::kFedAvg: base = "fedavg"; break;
    case Algorithm::kQFedAvg: base = "qfedavg"; break;
    case Algorithm::kPfedme: base = "pfedme"; break;
  }
  return tra ? "tra-" + base : base;
}

bool parse_algorithm(const std::string& label, Algorithm* a, bool* tra) {
  std::string base = label;
  *tra = false;
  if (base.rfind("tra-", 0) == 0) {
    *tra = true;
    base = base.substr(4);
  }
  if (base == "fedavg") *a = Algorithm::kFedAvg;
  else if (base == "qfedavg") *a = Algorithm::kQFedAvg;
  else if (base == "pfedme") *a = Algorithm::kPfedme;
  else return false;
  return true;
}

std::string format_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string dataset_label(const SyntheticConfig& d) {
  if (d.iid) return "iid";
  return "syn" + format_ratio(d.alpha) + "-" + format_ratio(d.beta);
}

std::string cell_name(const std::string& algo, const std::string& dataset,
                      double eligible_ratio, double loss_ratio,
                      std::optional<std::uint64_t> seed) {
  std::string name = algo + "_" + dataset + "_e" +
                     format_ratio(eligible_ratio) + "_r" +
                     format_ratio(loss_ratio);
  if (seed) name += "_s" + std::to_string(*seed);
  return name;
}

namespace {

struct Cell {
  std::string name;
  ExperimentConfig cfg;
  CellOutcome outcome;
};

// The experiment seed is a hash of the base seed, the dataset and the
// replicate index only.  Algorithm and treatment ratios are deliberately
// left out so that every comparison in a grid is paired: competing
// algorithms, eligibility levels and loss ratios all face the same data
// and the same profile permutation (a lower eligible ratio then marks a
// superset of the clients insufficient instead of reshuffling them).
std::uint64_t cell_seed(std::uint64_t base_seed, const std::string& dataset,
                        std::uint64_t replicate) {
  const std::string coord = dataset + "|s" + std::to_string(replicate);
  return derive_key(base_seed, {fnv1a64(coord)});
}

}  // namespace

std::vector<CellOutcome> run_matrix(const MatrixSpec& spec,
                                    const std::string& out_dir, int jobs) {
  if (spec.algorithms.empty() || spec.datasets.empty() ||
      spec.eligible_ratios.empty() || spec.loss_ratios.empty() ||
      spec.seeds.empty()) {
    throw std::invalid_argument("run_matrix: an axis is empty");
  }
  namespace fs = std::filesystem;

  std::vector<Cell> cells;
  for (const std::string& algo : spec.algorithms) {
    Algorithm a;
    bool tra;
    if (!parse_algorithm(algo, &a, &tra)) {
      throw std::invalid_argument("run_matrix: unknown algorithm " + algo);
    }
    for (const DatasetChoice& ds : spec.datasets) {
      for (double e : spec.eligible_ratios) {
        for (double r : spec.loss_ratios) {
          for (std::uint64_t s : spec.seeds) {
            Cell cell;
            cell.cfg = spec.base;
            cell.cfg.algorithm = a;
            cell.cfg.tra = tra;
            cell.cfg.dataset = ds.config;
            cell.cfg.dataset_seed_explicit = false;
            cell.cfg.eligible_ratio = e;
            cell.cfg.loss_ratio = r;
            cell.cfg.seed = cell_seed(spec.base.seed, ds.id, s);
            cell.name = cell_name(
                algo, ds.id, e, r,
                spec.explicit_seeds ? std::optional<std::uint64_t>(s)
                                    : std::nullopt);
            cell.outcome.name = cell.name;
            cell.outcome.algorithm = algo;
            cell.outcome.dataset = ds.id;
            cell.outcome.eligible_ratio = e;
            cell.outcome.loss_ratio = r;
            cell.outcome.seed = s;
            cell.outcome.derived_seed = cell.cfg.seed;
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }

  // Validate everything before starting any work or touching the disk.
  for (const Cell& cell : cells) validate_config(cell.cfg);
  fs::create_directories(out_dir);

  if (jobs < 1) jobs = 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& cell = cells[i];
      try {
        const ExperimentResult result = run_experiment(cell.cfg);
        // Write-then-rename keeps an interrupted run from leaving a
        // half-written cell behind.
        const fs::path final_path = fs::path(out_dir) / (cell.name + ".csv");
        const fs::path tmp_path = fs::path(out_dir) / (cell.name + ".csv.tmp");
        emit_csv(result.records, tmp_path.string());
        fs::rename(tmp_path, final_path);
        cell.outcome.summary = summarize_final(result.records);
        cell.outcome.status = "ok";
      } catch (const std::exception& e) {
        cell.outcome.status = std::string("error: ") + e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  const std::size_t num_workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
  for (std::size_t i = 0; i + 1 < num_workers; ++i) {
    pool.emplace_back(worker);
  }
  worker();  // this thread participates
  for (auto& th : pool) th.join();

  std::vector<CellOutcome> outcomes;
  outcomes.reserve(cells.size());
  for (Cell& cell : cells) outcomes.push_back(std::move(cell.outcome));

  write_matrix_summary(outcomes,
                       (fs::path(out_dir) / "summary.csv").string());
  return outcomes;
}

void write_matrix_summary(const std::vector<CellOutcome>& cells,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("summary: cannot open " + path);
  out << "algorithm,dataset,eligible_ratio,loss_ratio,seed,status,"
         "sample_acc,average,best10,worst10,variance\n";
  for (const CellOutcome& c : cells) {
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << c.algorithm << "," << c.dataset << ","
        << format_ratio(c.eligible_ratio) << "," << format_ratio(c.loss_ratio)
        << "," << c.seed << "," << status;
    if (c.summary) {
      out << "," << format_fixed(c.summary->sample_acc) << ","
          << format_fixed(c.summary->fairness.average) << ","
          << format_fixed(c.summary->fairness.best10) << ","
          << format_fixed(c.summary->fairness.worst10) << ","
          << format_fixed(c.summary->fairness.variance);
    } else {
      out << ",,,,,";
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("summary: write failed for " + path);
}

}  // namespace ltfl
