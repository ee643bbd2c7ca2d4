#include "ltfl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ltfl {

namespace {

using nlohmann::json;

// A typo like "eligible_ration" must fail loudly, not run the default.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key \"" + key + "\" in " + where);
    }
  }
}

double get_number(const json& obj, const std::string& key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: " + where + "." + key + " must be a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback,
            const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: " + where + "." + key + " must be an integer");
  }
  return v.get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& key,
                      std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  const bool ok = v.is_number_unsigned() ||
                  (v.is_number_integer() && v.get<long long>() >= 0);
  if (!ok) {
    throw ConfigError("config: " + where + "." + key +
                      " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ConfigError("config: " + where + "." + key + " must be a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    throw ConfigError("config: " + where + "." + key + " must be a string");
  }
  return v.get<std::string>();
}

// Named dataset shorthands; "(a,b)" means Synthetic(alpha=a, beta=b).
bool parse_dataset_name(const std::string& name, SyntheticConfig* out) {
  if (name == "iid") {
    out->iid = true;
    out->alpha = 0.0;
    out->beta = 0.0;
    return true;
  }
  if (name.size() >= 5 && name.front() == '(' && name.back() == ')') {
    const std::string inner = name.substr(1, name.size() - 2);
    const std::size_t comma = inner.find(',');
    if (comma == std::string::npos) return false;
    try {
      std::size_t pos_a = 0;
      std::size_t pos_b = 0;
      const std::string a_text = inner.substr(0, comma);
      const std::string b_text = inner.substr(comma + 1);
      const double a = std::stod(a_text, &pos_a);
      const double b = std::stod(b_text, &pos_b);
      if (pos_a != a_text.size() || pos_b != b_text.size()) return false;
      out->iid = false;
      out->alpha = a;
      out->beta = b;
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }
  return false;
}

SyntheticConfig parse_dataset(const json& v, const SyntheticConfig& base,
                              bool* seed_explicit,
                              const std::string& where) {
  SyntheticConfig cfg = base;
  if (v.is_string()) {
    if (!parse_dataset_name(v.get<std::string>(), &cfg)) {
      throw ConfigError("config: unknown dataset \"" + v.get<std::string>() +
                        "\" in " + where +
                        " (expected \"iid\" or \"(alpha,beta)\")");
    }
    return cfg;
  }
  if (!v.is_object()) {
    throw ConfigError("config: " + where +
                      " must be a dataset name or an object");
  }
  check_keys(v,
             {"name", "alpha", "beta", "iid", "num_clients", "features",
              "classes", "train_fraction", "min_samples", "sample_log_mean",
              "sample_log_sigma", "seed"},
             where);
  if (v.contains("name")) {
    if (!v.at("name").is_string() ||
        !parse_dataset_name(v.at("name").get<std::string>(), &cfg)) {
      throw ConfigError("config: bad dataset name in " + where);
    }
  }
  cfg.alpha = get_number(v, "alpha", cfg.alpha, where);
  cfg.beta = get_number(v, "beta", cfg.beta, where);
  cfg.iid = get_bool(v, "iid", cfg.iid, where);
  cfg.num_clients = get_int(v, "num_clients", cfg.num_clients, where);
  cfg.features = get_int(v, "features", cfg.features, where);
  cfg.classes = get_int(v, "classes", cfg.classes, where);
  cfg.train_fraction =
      get_number(v, "train_fraction", cfg.train_fraction, where);
  cfg.min_samples = get_int(v, "min_samples", cfg.min_samples, where);
  cfg.sample_log_mean =
      get_number(v, "sample_log_mean", cfg.sample_log_mean, where);
  cfg.sample_log_sigma =
      get_number(v, "sample_log_sigma", cfg.sample_log_sigma, where);
  if (v.contains("seed")) {
    cfg.seed = get_u64(v, "seed", cfg.seed, where);
    if (seed_explicit) *seed_explicit = true;
  }
  return cfg;
}

ExperimentConfig parse_experiment(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError("config: " + where + " must be an object");
  }
  check_keys(j,
             {"algorithm", "dataset", "model", "rounds", "clients_per_round",
              "eligible_ratio", "loss_ratio", "seed", "packet_size",
              "compensation", "aggregation_form", "train", "qffl", "pfedme",
              "upload"},
             where);

  ExperimentConfig cfg;

  const std::string algo = get_string(j, "algorithm", "fedavg", where);
  if (!parse_algorithm(algo, &cfg.algorithm, &cfg.tra)) {
    throw ConfigError("config: unknown algorithm \"" + algo + "\" in " +
                      where);
  }

  if (j.contains("dataset")) {
    cfg.dataset = parse_dataset(j.at("dataset"), cfg.dataset,
                                &cfg.dataset_seed_explicit,
                                where + ".dataset");
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    if (!m.is_object()) {
      throw ConfigError("config: " + where + ".model must be an object");
    }
    check_keys(m, {"kind", "hidden_units"}, where + ".model");
    const std::string kind = get_string(m, "kind", "logistic", where);
    if (kind == "logistic") {
      cfg.model_kind = ModelKind::kLogistic;
    } else if (kind == "mlp") {
      cfg.model_kind = ModelKind::kMlp;
    } else {
      throw ConfigError("config: unknown model kind \"" + kind + "\"");
    }
    cfg.hidden_units =
        get_int(m, "hidden_units", cfg.hidden_units, where + ".model");
  }

  cfg.rounds = get_int(j, "rounds", cfg.rounds, where);
  cfg.clients_per_round =
      get_int(j, "clients_per_round", cfg.clients_per_round, where);
  cfg.eligible_ratio =
      get_number(j, "eligible_ratio", cfg.eligible_ratio, where);
  cfg.loss_ratio = get_number(j, "loss_ratio", cfg.loss_ratio, where);
  cfg.seed = get_u64(j, "seed", cfg.seed, where);
  cfg.packet_size = get_int(j, "packet_size", cfg.packet_size, where);

  const std::string comp =
      get_string(j, "compensation", "nominal", where);
  if (comp == "nominal") {
    cfg.compensation = Compensation::kNominal;
  } else if (comp == "realized") {
    cfg.compensation = Compensation::kRealized;
  } else {
    throw ConfigError("config: compensation must be nominal or realized");
  }

  const std::string form =
      get_string(j, "aggregation_form", "compensated-mean", where);
  if (form == "compensated-mean") {
    cfg.aggregation_form = AggregationForm::kCompensatedMean;
  } else if (form == "split-normalized") {
    cfg.aggregation_form = AggregationForm::kSplitNormalized;
  } else {
    throw ConfigError(
        "config: aggregation_form must be compensated-mean or "
        "split-normalized");
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    if (!t.is_object()) {
      throw ConfigError("config: " + where + ".train must be an object");
    }
    check_keys(t, {"learning_rate", "epochs", "batch_size"},
               where + ".train");
    cfg.train.learning_rate =
        get_number(t, "learning_rate", cfg.train.learning_rate, where);
    cfg.train.epochs = get_int(t, "epochs", cfg.train.epochs, where);
    cfg.train.batch_size =
        get_int(t, "batch_size", cfg.train.batch_size, where);
  }

  if (j.contains("qffl")) {
    const json& q = j.at("qffl");
    if (!q.is_object()) {
      throw ConfigError("config: " + where + ".qffl must be an object");
    }
    check_keys(q, {"q", "lipschitz"}, where + ".qffl");
    cfg.qffl.q = get_number(q, "q", cfg.qffl.q, where);
    cfg.qffl.lipschitz =
        get_number(q, "lipschitz", cfg.qffl.lipschitz, where);
  }

  if (j.contains("pfedme")) {
    const json& p = j.at("pfedme");
    if (!p.is_object()) {
      throw ConfigError("config: " + where + ".pfedme must be an object");
    }
    check_keys(p,
               {"lambda", "inner_steps", "personal_step", "local_lr",
                "local_rounds", "beta", "batch_size"},
               where + ".pfedme");
    cfg.pfedme.lambda = get_number(p, "lambda", cfg.pfedme.lambda, where);
    cfg.pfedme.inner_steps =
        get_int(p, "inner_steps", cfg.pfedme.inner_steps, where);
    cfg.pfedme.personal_step =
        get_number(p, "personal_step", cfg.pfedme.personal_step, where);
    cfg.pfedme.local_lr =
        get_number(p, "local_lr", cfg.pfedme.local_lr, where);
    cfg.pfedme.local_rounds =
        get_int(p, "local_rounds", cfg.pfedme.local_rounds, where);
    cfg.pfedme.beta = get_number(p, "beta", cfg.pfedme.beta, where);
    cfg.pfedme.batch_size =
        get_int(p, "batch_size", cfg.pfedme.batch_size, where);
  }

  if (j.contains("upload")) {
    const json& u = j.at("upload");
    if (!u.is_object()) {
      throw ConfigError("config: " + where + ".upload must be an object");
    }
    check_keys(u, {"sufficient_mbps", "insufficient_mbps", "payload_bytes"},
               where + ".upload");
    UploadCost cost;
    cost.sufficient_mbps =
        get_number(u, "sufficient_mbps", cost.sufficient_mbps, where);
    cost.insufficient_mbps =
        get_number(u, "insufficient_mbps", cost.insufficient_mbps, where);
    if (u.contains("payload_bytes")) {
      cost.payload_bytes = get_number(u, "payload_bytes", 0.0, where);
    }
    cfg.upload = cost;
  }

  try {
    validate_config(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ExperimentConfig parse_experiment_config_text(const std::string& json_text) {
  return parse_experiment(parse_json_text(json_text), "config");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config_text(read_file(path));
}

bool is_matrix_config_text(const std::string& json_text) {
  const json j = parse_json_text(json_text);
  return j.is_object() && (j.contains("axes") || j.contains("base"));
}

MatrixSpec parse_matrix_spec_text(const std::string& json_text) {
  const json j = parse_json_text(json_text);
  if (!j.is_object()) throw ConfigError("config: root must be an object");

  MatrixSpec spec;
  if (j.contains("base") || j.contains("axes")) {
    check_keys(j, {"base", "axes"}, "config");
    spec.base = j.contains("base")
                    ? parse_experiment(j.at("base"), "base")
                    : ExperimentConfig{};
  } else {
    // A plain experiment config is a 1-cell grid.
    spec.base = parse_experiment(j, "config");
  }

  spec.algorithms = {algorithm_label(spec.base.algorithm, spec.base.tra)};
  spec.datasets = {{dataset_label(spec.base.dataset), spec.base.dataset}};
  spec.eligible_ratios = {spec.base.eligible_ratio};
  spec.loss_ratios = {spec.base.loss_ratio};
  spec.seeds = {spec.base.seed};
  spec.explicit_seeds = false;

  if (!j.contains("axes")) return spec;

  const json& axes = j.at("axes");
  if (!axes.is_object()) {
    throw ConfigError("config: axes must be an object");
  }
  check_keys(axes,
             {"algorithms", "datasets", "eligible_ratios", "loss_ratios",
              "seeds"},
             "axes");

  auto require_nonempty_array = [](const json& v, const std::string& name) {
    if (!v.is_array() || v.empty()) {
      throw ConfigError("config: axes." + name +
                        " must be a non-empty array");
    }
  };

  if (axes.contains("algorithms")) {
    const json& v = axes.at("algorithms");
    require_nonempty_array(v, "algorithms");
    spec.algorithms.clear();
    for (const json& item : v) {
      if (!item.is_string()) {
        throw ConfigError("config: axes.algorithms entries must be strings");
      }
      Algorithm a;
      bool tra;
      if (!parse_algorithm(item.get<std::string>(), &a, &tra)) {
        throw ConfigError("config: unknown algorithm \"" +
                          item.get<std::string>() + "\" in axes.algorithms");
      }
      spec.algorithms.push_back(item.get<std::string>());
    }
  }

  if (axes.contains("datasets")) {
    const json& v = axes.at("datasets");
    require_nonempty_array(v, "datasets");
    spec.datasets.clear();
    for (const json& item : v) {
      SyntheticConfig ds = parse_dataset(item, spec.base.dataset, nullptr,
                                         "axes.datasets");
      spec.datasets.push_back({dataset_label(ds), ds});
    }
  }

  if (axes.contains("eligible_ratios")) {
    const json& v = axes.at("eligible_ratios");
    require_nonempty_array(v, "eligible_ratios");
    spec.eligible_ratios.clear();
    for (const json& item : v) {
      if (!item.is_number()) {
        throw ConfigError("config: axes.eligible_ratios must be numbers");
      }
      spec.eligible_ratios.push_back(item.get<double>());
    }
  }

  if (axes.contains("loss_ratios")) {
    const json& v = axes.at("loss_ratios");
    require_nonempty_array(v, "loss_ratios");
    spec.loss_ratios.clear();
    for (const json& item : v) {
      if (!item.is_number()) {
        throw ConfigError("config: axes.loss_ratios must be numbers");
      }
      spec.loss_ratios.push_back(item.get<double>());
    }
  }

  if (axes.contains("seeds")) {
    const json& v = axes.at("seeds");
    require_nonempty_array(v, "seeds");
    spec.seeds.clear();
    for (const json& item : v) {
      if (!item.is_number_integer()) {
        throw ConfigError("config: axes.seeds must be integers");
      }
      spec.seeds.push_back(item.get<std::uint64_t>());
    }
    spec.explicit_seeds = true;
  }

  return spec;
}

MatrixSpec load_matrix_spec(const std::string& path) {
  return parse_matrix_spec_text(read_file(path));
}

}  // namespace ltfl
