#include <map>
#include <string>

#include "doctest.h"
#include "ltfl/config.hpp"
#include "ltfl/presets.hpp"

using namespace ltfl;

TEST_CASE("an empty config runs on defaults") {
  const ExperimentConfig cfg = parse_experiment_config_text("{}");
  CHECK(cfg.algorithm == Algorithm::kFedAvg);
  CHECK(!cfg.tra);
  CHECK(cfg.rounds == 200);
  CHECK(cfg.clients_per_round == 10);
  CHECK(cfg.eligible_ratio == 1.0);
  CHECK(cfg.loss_ratio == 0.0);
  CHECK(cfg.seed == 1);
  CHECK(cfg.packet_size == 256);
  CHECK(!cfg.dataset_seed_explicit);
  CHECK(!cfg.upload.has_value());
}

TEST_CASE("every field parses") {
  const ExperimentConfig cfg = parse_experiment_config_text(R"json({
    "algorithm": "tra-qfedavg",
    "dataset": {
      "name": "(1,2)",
      "num_clients": 40,
      "features": 30,
      "classes": 5,
      "min_samples": 20,
      "seed": 77
    },
    "model": {"kind": "mlp", "hidden_units": 30},
    "rounds": 50,
    "clients_per_round": 8,
    "eligible_ratio": 0.7,
    "loss_ratio": 0.3,
    "seed": 9,
    "packet_size": 64,
    "compensation": "realized",
    "aggregation_form": "split-normalized",
    "train": {"learning_rate": 0.05, "epochs": 2, "batch_size": 16},
    "qffl": {"q": 2.0, "lipschitz": 5.0},
    "pfedme": {"lambda": 20.0, "inner_steps": 3, "personal_step": 0.01,
               "local_lr": 0.02, "local_rounds": 4, "beta": 1.5,
               "batch_size": 10},
    "upload": {"sufficient_mbps": 10.0, "insufficient_mbps": 1.5,
               "payload_bytes": 4096}
  })json");

  CHECK(cfg.algorithm == Algorithm::kQFedAvg);
  CHECK(cfg.tra);
  CHECK(cfg.dataset.alpha == 1.0);
  CHECK(cfg.dataset.beta == 2.0);
  CHECK(!cfg.dataset.iid);
  CHECK(cfg.dataset.num_clients == 40);
  CHECK(cfg.dataset.features == 30);
  CHECK(cfg.dataset.classes == 5);
  CHECK(cfg.dataset.min_samples == 20);
  CHECK(cfg.dataset.seed == 77);
  CHECK(cfg.dataset_seed_explicit);
  CHECK(cfg.model_kind == ModelKind::kMlp);
  CHECK(cfg.hidden_units == 30);
  CHECK(cfg.rounds == 50);
  CHECK(cfg.clients_per_round == 8);
  CHECK(cfg.eligible_ratio == 0.7);
  CHECK(cfg.loss_ratio == 0.3);
  CHECK(cfg.seed == 9);
  CHECK(cfg.packet_size == 64);
  CHECK(cfg.compensation == Compensation::kRealized);
  CHECK(cfg.aggregation_form == AggregationForm::kSplitNormalized);
  CHECK(cfg.train.learning_rate == 0.05);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.batch_size == 16);
  CHECK(cfg.qffl.q == 2.0);
  CHECK(cfg.qffl.lipschitz == 5.0);
  CHECK(cfg.pfedme.lambda == 20.0);
  CHECK(cfg.pfedme.inner_steps == 3);
  CHECK(cfg.pfedme.beta == 1.5);
  REQUIRE(cfg.upload.has_value());
  CHECK(cfg.upload->sufficient_mbps == 10.0);
  CHECK(cfg.upload->insufficient_mbps == 1.5);
  REQUIRE(cfg.upload->payload_bytes.has_value());
  CHECK(*cfg.upload->payload_bytes == 4096.0);
}

TEST_CASE("dataset shorthands") {
  auto dataset_of = [](const std::string& text) {
    return parse_experiment_config_text("{\"dataset\": " + text + "}").dataset;
  };
  const SyntheticConfig iid = dataset_of("\"iid\"");
  CHECK(iid.iid);
  const SyntheticConfig pair = dataset_of("\"(0.5,0.5)\"");
  CHECK(!pair.iid);
  CHECK(pair.alpha == 0.5);
  CHECK(pair.beta == 0.5);
  const SyntheticConfig spaced = dataset_of("\"(2, 0.25)\"");
  CHECK(spaced.alpha == 2.0);
  CHECK(spaced.beta == 0.25);

  CHECK_THROWS_AS(dataset_of("\"synthetic\""), ConfigError);
  CHECK_THROWS_AS(dataset_of("\"(a,b)\""), ConfigError);
  CHECK_THROWS_AS(dataset_of("\"(1)\""), ConfigError);
  CHECK_THROWS_AS(dataset_of("3"), ConfigError);
}

TEST_CASE("unknown keys are rejected, not ignored") {
  CHECK_THROWS_AS(parse_experiment_config_text(R"json({"eligible_ration": 0.7})json"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config_text(R"json({"train": {"lr": 0.1}})json"), ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config_text(R"json({"dataset": {"alfa": 1.0}})json"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_matrix_spec_text(R"json({"base": {}, "axes": {"algos": ["fedavg"]}})json"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_matrix_spec_text(R"json({"base": {}, "extra": 1})json"), ConfigError);
}

TEST_CASE("wrong types and bad values become config errors") {
  CHECK_THROWS_AS(parse_experiment_config_text("[1,2]"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"rounds\": \"many\"}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"rounds\": 2.5}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"seed\": -5}"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"algorithm\": 42}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"algorithm\": \"adam\"}"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config_text("{\"compensation\": \"hope\"}"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config_text("{\"aggregation_form\": \"mean\"}"),
      ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"model\": {\"kind\": "
                                               "\"cnn\"}}"),
                  ConfigError);
  // Out-of-range values fail at the same boundary as bad syntax.
  CHECK_THROWS_AS(parse_experiment_config_text("{\"loss_ratio\": 1.0}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("{\"eligible_ratio\": 0.0}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config_text("not json"), ConfigError);
}

TEST_CASE("a plain experiment config is a one-cell grid") {
  const MatrixSpec spec = parse_matrix_spec_text(R"json({
    "algorithm": "tra-fedavg",
    "dataset": "(1,1)",
    "eligible_ratio": 0.8,
    "loss_ratio": 0.2,
    "seed": 3
  })json");
  CHECK(spec.algorithms == std::vector<std::string>{"tra-fedavg"});
  REQUIRE(spec.datasets.size() == 1);
  CHECK(spec.datasets[0].id == "syn1-1");
  CHECK(spec.eligible_ratios == std::vector<double>{0.8});
  CHECK(spec.loss_ratios == std::vector<double>{0.2});
  CHECK(spec.seeds == std::vector<std::uint64_t>{3});
  CHECK(!spec.explicit_seeds);
}

TEST_CASE("axes expand around the base config") {
  const MatrixSpec spec = parse_matrix_spec_text(R"json({
    "base": {
      "algorithm": "qfedavg",
      "dataset": {"name": "(1,1)", "num_clients": 20},
      "rounds": 10,
      "seed": 5
    },
    "axes": {
      "algorithms": ["qfedavg", "tra-qfedavg"],
      "datasets": ["iid", "(2,2)"],
      "eligible_ratios": [1.0, 0.7],
      "loss_ratios": [0.1, 0.3],
      "seeds": [1, 2, 3]
    }
  })json");
  CHECK(spec.algorithms ==
        std::vector<std::string>{"qfedavg", "tra-qfedavg"});
  REQUIRE(spec.datasets.size() == 2);
  CHECK(spec.datasets[0].id == "iid");
  CHECK(spec.datasets[1].id == "syn2-2");
  // Axis datasets inherit the base dataset's shape parameters.
  CHECK(spec.datasets[0].config.num_clients == 20);
  CHECK(spec.datasets[1].config.num_clients == 20);
  CHECK(spec.eligible_ratios == std::vector<double>{1.0, 0.7});
  CHECK(spec.loss_ratios == std::vector<double>{0.1, 0.3});
  CHECK(spec.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(spec.explicit_seeds);
  CHECK(spec.base.rounds == 10);
}

TEST_CASE("axis validation") {
  CHECK_THROWS_AS(
      parse_matrix_spec_text(R"json({"base": {}, "axes": {"algorithms": []}})json"),
      ConfigError);
  CHECK_THROWS_AS(parse_matrix_spec_text(
                      R"json({"base": {}, "axes": {"algorithms": ["sgd"]}})json"),
                  ConfigError);
  CHECK_THROWS_AS(parse_matrix_spec_text(
                      R"json({"base": {}, "axes": {"loss_ratios": "0.1"}})json"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_matrix_spec_text(R"json({"base": {}, "axes": {"seeds": [1.5]}})json"),
      ConfigError);
}

TEST_CASE("matrix configs are recognized by shape") {
  CHECK(is_matrix_config_text(R"json({"base": {"rounds": 1}})json"));
  CHECK(is_matrix_config_text(R"json({"axes": {"seeds": [1]}})json"));
  CHECK(!is_matrix_config_text(R"json({"rounds": 1})json"));
  CHECK_THROWS_AS(is_matrix_config_text("{"), ConfigError);
}

TEST_CASE("missing config files are reported") {
  CHECK_THROWS_AS(load_experiment_config("no_such_config.json"), ConfigError);
  CHECK_THROWS_AS(load_matrix_spec("no_such_config.json"), ConfigError);
}

TEST_CASE("built-in presets parse and expand to the documented grids") {
  const std::map<std::string, std::size_t> expected_cells = {
      {"fig3", 4}, {"fig4", 4},   {"fig7", 6},
      {"fig8", 6}, {"table1", 6}, {"table2", 36},
  };
  REQUIRE(presets().size() == expected_cells.size());
  for (const Preset& p : presets()) {
    CAPTURE(p.name);
    REQUIRE(expected_cells.count(p.name) == 1);
    CHECK(!p.description.empty());
    const MatrixSpec spec = parse_matrix_spec_text(p.json_text);
    const std::size_t cells = spec.algorithms.size() * spec.datasets.size() *
                              spec.eligible_ratios.size() *
                              spec.loss_ratios.size() * spec.seeds.size();
    CHECK(cells == expected_cells.at(p.name));
  }
  CHECK(find_preset("fig7") != nullptr);
  CHECK(find_preset("fig9") == nullptr);
}
