#include "ltfl/presets.hpp"

namespace ltfl {

namespace {

// Shared defaults are written out in every preset so a preset file stands
// on its own when copied and edited.
const std::vector<Preset> kPresets = {
    {"fig3",
     "Threshold-biased FedAvg across eligibility ratios on Synthetic(0.5,0.5)",
     R"json({
  "base": {
    "algorithm": "fedavg",
    "dataset": "(0.5,0.5)",
    "rounds": 200,
    "clients_per_round": 10,
    "loss_ratio": 0.1,
    "seed": 1,
    "train": {"learning_rate": 0.1, "epochs": 1, "batch_size": 10}
  },
  "axes": {
    "eligible_ratios": [1.0, 0.9, 0.8, 0.7]
  }
})json"},
    {"fig4",
     "Threshold-biased pFedMe across eligibility ratios on Synthetic(0.5,0.5)",
     R"json({
  "base": {
    "algorithm": "pfedme",
    "dataset": "(0.5,0.5)",
    "rounds": 150,
    "clients_per_round": 10,
    "loss_ratio": 0.1,
    "seed": 1
  },
  "axes": {
    "eligible_ratios": [1.0, 0.9, 0.8, 0.7]
  }
})json"},
    {"fig7",
     "Per-round curves: q-FedAvg with and without loss tolerance under "
     "10/30/50% packet loss",
     R"json({
  "base": {
    "algorithm": "qfedavg",
    "dataset": "(1,1)",
    "rounds": 200,
    "clients_per_round": 10,
    "eligible_ratio": 0.7,
    "seed": 1,
    "train": {"learning_rate": 0.1, "epochs": 1, "batch_size": 10},
    "qffl": {"q": 1.0, "lipschitz": 10.0}
  },
  "axes": {
    "algorithms": ["qfedavg", "tra-qfedavg"],
    "loss_ratios": [0.1, 0.3, 0.5]
  }
})json"},
    {"fig8",
     "Per-round curves: pFedMe with and without loss tolerance under "
     "10/20/30% packet loss",
     R"json({
  "base": {
    "algorithm": "pfedme",
    "dataset": "(0.5,0.5)",
    "rounds": 150,
    "clients_per_round": 10,
    "eligible_ratio": 0.7,
    "seed": 1
  },
  "axes": {
    "algorithms": ["pfedme", "tra-pfedme"],
    "loss_ratios": [0.1, 0.2, 0.3]
  }
})json"},
    {"table1",
     "q-FedAvg fairness stats: full participation vs 70% eligibility on "
     "iid and heterogeneous data",
     R"json({
  "base": {
    "algorithm": "qfedavg",
    "rounds": 200,
    "clients_per_round": 10,
    "loss_ratio": 0.1,
    "seed": 1,
    "train": {"learning_rate": 0.1, "epochs": 1, "batch_size": 10},
    "qffl": {"q": 1.0, "lipschitz": 10.0}
  },
  "axes": {
    "datasets": ["iid", "(0.5,0.5)", "(1,1)"],
    "eligible_ratios": [1.0, 0.7]
  }
})json"},
    {"table2",
     "Final fairness stats: q-FedAvg vs loss-tolerant q-FedAvg across "
     "eligibility and loss grids",
     R"json({
  "base": {
    "algorithm": "qfedavg",
    "rounds": 200,
    "clients_per_round": 10,
    "seed": 1,
    "train": {"learning_rate": 0.1, "epochs": 1, "batch_size": 10},
    "qffl": {"q": 1.0, "lipschitz": 10.0}
  },
  "axes": {
    "algorithms": ["qfedavg", "tra-qfedavg"],
    "datasets": ["(1,1)", "(2,2)"],
    "eligible_ratios": [0.7, 0.8, 0.9],
    "loss_ratios": [0.1, 0.3, 0.5]
  }
})json"},
};

}  // namespace

const std::vector<Preset>& presets() { return kPresets; }

const Preset* find_preset(const std::string& name) {
  for (const Preset& p : kPresets) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace ltfl
