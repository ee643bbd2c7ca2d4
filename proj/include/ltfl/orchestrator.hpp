#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltfl/aggregation.hpp"
#include "ltfl/dataset.hpp"
#include "ltfl/model.hpp"
#include "ltfl/netsim.hpp"
#include "ltfl/report.hpp"

namespace ltfl {

enum class Algorithm { kFedAvg, kQFedAvg, kPfedme };

// Who may be picked each round.  kThresholdBiased drops every client whose
// link cannot retransmit (the usual production policy, and the source of
// the participation bias this simulator measures).  kAdmitAll lets lossy
// clients in and relies on zero-fill + compensation downstream.
enum class SelectionPolicy { kThresholdBiased, kAdmitAll };

struct UploadCost {
  double sufficient_mbps = 8.0;
  double insufficient_mbps = 2.0;
  std::optional<double> payload_bytes;  // default: 8 bytes per parameter
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kFedAvg;
  bool tra = false;  // admit-all selection + zero-fill + compensation
  SyntheticConfig dataset;
  bool dataset_seed_explicit = false;  // else derived from `seed`
  ModelKind model_kind = ModelKind::kLogistic;
  int hidden_units = 20;
  int rounds = 200;
  int clients_per_round = 10;
  double eligible_ratio = 1.0;
  double loss_ratio = 0.0;
  std::uint64_t seed = 1;
  int packet_size = 256;
  Compensation compensation = Compensation::kNominal;
  AggregationForm aggregation_form = AggregationForm::kCompensatedMean;
  TrainHyper train;
  QfflHyper qffl;
  PfedmeHyper pfedme;
  std::optional<UploadCost> upload;
};

// Throws std::invalid_argument naming the offending field.
void validate_config(const ExperimentConfig& cfg);

struct ServerState {
  ParamVector w;
  std::vector<NetworkProfile> profiles;  // fixed for the whole run
  std::vector<ParamVector> thetas;       // personal models (pfedme only)
  std::vector<ParamVector> pending_local_w;  // this round's local models
  int round = 0;
};

// Uniform sample of k distinct ids from the policy's pool, returned
// sorted.  k larger than the pool returns the whole pool.
std::vector<int> select_clients(SelectionPolicy policy,
                                const std::vector<NetworkProfile>& profiles,
                                int k, Rng& rng);

// Collects sufficiency reports and fixes profiles before any selection
// happens, per the protocol.  Model starts from init_params.
ServerState init_experiment(const ExperimentConfig& cfg,
                            const std::vector<ClientDataset>& data);

// One full round: select, train locally, upload over the simulated
// network, aggregate, evaluate.  Advances state.round.
RoundRecord run_round(ServerState& state, const ExperimentConfig& cfg,
                      const std::vector<ClientDataset>& data,
                      const LabeledSet& pooled_test);

struct ExperimentResult {
  // records[0] evaluates the untouched initial model (round 0); one more
  // record per completed round follows.
  std::vector<RoundRecord> records;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// --- naming -------------------------------------------------------------

std::string algorithm_label(Algorithm a, bool tra);  // e.g. "tra-qfedavg"
bool parse_algorithm(const std::string& label, Algorithm* a, bool* tra);

std::string dataset_label(const SyntheticConfig& d);  // "iid", "syn1-1", ...
std::string format_ratio(double v);                   // shortest decimal form

// "<algo>_<dataset>_e<ratio>_r<loss>", plus "_s<seed>" when the matrix
// has an explicit seed axis.
std::string cell_name(const std::string& algo, const std::string& dataset,
                      double eligible_ratio, double loss_ratio,
                      std::optional<std::uint64_t> seed);

// --- experiment grids ----------------------------------------------------

struct DatasetChoice {
  std::string id;  // filename-safe label
  SyntheticConfig config;
};

struct MatrixSpec {
  ExperimentConfig base;
  std::vector<std::string> algorithms;  // labels, e.g. "tra-qfedavg"
  std::vector<DatasetChoice> datasets;
  std::vector<double> eligible_ratios;
  std::vector<double> loss_ratios;
  std::vector<std::uint64_t> seeds;  // replicate seeds
  bool explicit_seeds = false;       // seed axis present in the config
};

struct CellOutcome {
  std::string name;
  std::string algorithm;
  std::string dataset;
  double eligible_ratio = 0.0;
  double loss_ratio = 0.0;
  std::uint64_t seed = 0;          // replicate seed
  std::uint64_t derived_seed = 0;  // the experiment seed actually used
  std::string status;              // "ok" or an error message
  std::optional<SummaryRow> summary;
};

// Runs the full cross product, one CSV per cell plus summary.csv, using up
// to `jobs` worker threads.  A failing cell is recorded in its summary row
// and does not stop the rest.  Cell seeds are derived from the base seed,
// the dataset and the replicate index only — not the algorithm or the
// eligible/loss ratios — so every treatment comparison in a grid is paired
// on identical data, and any single cell is reproducible standalone.
std::vector<CellOutcome> run_matrix(const MatrixSpec& spec,
                                    const std::string& out_dir, int jobs);

void write_matrix_summary(const std::vector<CellOutcome>& cells,
                          const std::string& path);

}  // namespace ltfl
