#include "ltfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltfl {

namespace {

void check_spec(const ModelSpec& spec) {
  if (spec.features < 1) throw std::invalid_argument("model: features < 1");
  if (spec.classes < 2) throw std::invalid_argument("model: classes < 2");
  if (spec.kind == ModelKind::kMlp && spec.hidden_units < 1) {
    throw std::invalid_argument("model: mlp needs hidden_units >= 1");
  }
}

void check_sample(const ModelSpec& spec, int y) {
  if (y < 0 || y >= spec.classes) {
    throw std::invalid_argument("model: label " + std::to_string(y) +
                                " outside [0, " +
                                std::to_string(spec.classes) + ")");
  }
}

// Logits for one sample; for mlp also fills the hidden activations.
void forward_logits(const ModelSpec& spec, const ParamVector& params,
                    const double* x, std::vector<double>& logits,
                    std::vector<double>* hidden) {
  const int f = spec.features;
  const int c = spec.classes;
  logits.resize(c);
  if (spec.kind == ModelKind::kLogistic) {
    const double* w = params.data();
    const double* b = params.data() + static_cast<std::size_t>(c) * f;
    for (int i = 0; i < c; ++i) {
      double acc = b[i];
      const double* wi = w + static_cast<std::size_t>(i) * f;
      for (int j = 0; j < f; ++j) acc += wi[j] * x[j];
      logits[i] = acc;
    }
    return;
  }
  const int h = spec.hidden_units;
  const double* w1 = params.data();
  const double* b1 = w1 + static_cast<std::size_t>(h) * f;
  const double* w2 = b1 + h;
  const double* b2 = w2 + static_cast<std::size_t>(c) * h;
  std::vector<double> local_hidden;
  std::vector<double>& act = hidden ? *hidden : local_hidden;
  act.resize(h);
  for (int i = 0; i < h; ++i) {
    double acc = b1[i];
    const double* wi = w1 + static_cast<std::size_t>(i) * f;
    for (int j = 0; j < f; ++j) acc += wi[j] * x[j];
    act[i] = std::tanh(acc);
  }
  for (int i = 0; i < c; ++i) {
    double acc = b2[i];
    const double* wi = w2 + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) acc += wi[j] * act[j];
    logits[i] = acc;
  }
}

// Softmax probabilities with max-subtraction, in place of the logits.
void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& z : v) {
    z = std::exp(z - m);
    sum += z;
  }
  for (double& z : v) z /= sum;
}

}  // namespace

std::size_t ModelSpec::dim() const {
  if (kind == ModelKind::kLogistic) {
    return static_cast<std::size_t>(features + 1) * classes;
  }
  return static_cast<std::size_t>(hidden_units) * (features + 1) +
         static_cast<std::size_t>(classes) * (hidden_units + 1);
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  ParamVector params(spec.dim(), 0.0);
  if (spec.kind == ModelKind::kLogistic) return params;

  Rng rng(seed, {kStreamModelInit});
  const int f = spec.features;
  const int h = spec.hidden_units;
  const int c = spec.classes;
  const double lim1 = std::sqrt(6.0 / (f + h));
  const double lim2 = std::sqrt(6.0 / (h + c));
  std::size_t i = 0;
  for (int k = 0; k < h * f; ++k) params[i++] = rng.uniform(-lim1, lim1);
  i += h;  // b1 stays zero
  for (int k = 0; k < c * h; ++k) params[i++] = rng.uniform(-lim2, lim2);
  return params;
}

double sample_loss(const ModelSpec& spec, const ParamVector& params,
                   const double* x, int y) {
  check_sample(spec, y);
  std::vector<double> logits;
  forward_logits(spec, params, x, logits, nullptr);
  softmax_inplace(logits);
  // Clamp keeps the loss finite when a class probability underflows.
  return -std::log(std::max(logits[y], 1e-300));
}

void accumulate_gradient(const ModelSpec& spec, const ParamVector& params,
                         const double* x, int y, double weight,
                         ParamVector& grad) {
  check_sample(spec, y);
  if (grad.size() != params.size()) {
    throw std::invalid_argument("model: gradient buffer has wrong size");
  }
  const int f = spec.features;
  const int c = spec.classes;
  std::vector<double> probs;
  std::vector<double> hidden;
  forward_logits(spec, params, x, probs, &hidden);
  softmax_inplace(probs);

  if (spec.kind == ModelKind::kLogistic) {
    double* gw = grad.data();
    double* gb = grad.data() + static_cast<std::size_t>(c) * f;
    for (int i = 0; i < c; ++i) {
      const double g = weight * (probs[i] - (i == y ? 1.0 : 0.0));
      double* gwi = gw + static_cast<std::size_t>(i) * f;
      for (int j = 0; j < f; ++j) gwi[j] += g * x[j];
      gb[i] += g;
    }
    return;
  }

  const int h = spec.hidden_units;
  const double* w1 = params.data();
  const double* w2 = w1 + static_cast<std::size_t>(h) * f + h;
  double* gw1 = grad.data();
  double* gb1 = gw1 + static_cast<std::size_t>(h) * f;
  double* gw2 = gb1 + h;
  double* gb2 = gw2 + static_cast<std::size_t>(c) * h;

  // Output layer, then backprop through tanh.
  std::vector<double> dhidden(h, 0.0);
  for (int i = 0; i < c; ++i) {
    const double g = weight * (probs[i] - (i == y ? 1.0 : 0.0));
    const double* w2i = w2 + static_cast<std::size_t>(i) * h;
    double* gw2i = gw2 + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) {
      gw2i[j] += g * hidden[j];
      dhidden[j] += g * w2i[j];
    }
    gb2[i] += g;
  }
  for (int i = 0; i < h; ++i) {
    const double g = dhidden[i] * (1.0 - hidden[i] * hidden[i]);
    double* gw1i = gw1 + static_cast<std::size_t>(i) * f;
    for (int j = 0; j < f; ++j) gw1i[j] += g * x[j];
    gb1[i] += g;
  }
}

int predict(const ModelSpec& spec, const ParamVector& params,
            const double* x) {
  std::vector<double> logits;
  forward_logits(spec, params, x, logits, nullptr);
  int best = 0;
  for (int i = 1; i < spec.classes; ++i) {
    if (logits[i] > logits[best]) best = i;  // ties keep the lower index
  }
  return best;
}

double evaluate_loss(const ModelSpec& spec, const ParamVector& params,
                     const LabeledSet& set) {
  if (set.size() == 0) {
    throw std::invalid_argument("evaluate: empty dataset");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    acc += sample_loss(spec, params, set.x.row(i), set.y[i]);
  }
  return acc / static_cast<double>(set.size());
}

double evaluate_accuracy(const ModelSpec& spec, const ParamVector& params,
                         const LabeledSet& set) {
  if (set.size() == 0) {
    throw std::invalid_argument("evaluate: empty dataset");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (predict(spec, params, set.x.row(i)) == set.y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

TrainResult local_train(const ParamVector& start, const ModelSpec& spec,
                        const LabeledSet& train, const TrainHyper& hyper,
                        Rng& rng) {
  check_spec(spec);
  if (start.size() != spec.dim()) {
    throw std::invalid_argument("local_train: params do not match spec");
  }
  if (hyper.epochs < 1) throw std::invalid_argument("local_train: epochs < 1");
  if (hyper.batch_size < 1) {
    throw std::invalid_argument("local_train: batch_size < 1");
  }
  if (hyper.learning_rate < 0.0) {
    throw std::invalid_argument("local_train: negative learning rate");
  }
  if (train.size() == 0) {
    throw std::invalid_argument("local_train: empty train set");
  }

  TrainResult result;
  result.initial_loss = evaluate_loss(spec, start, train);
  result.params = start;

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  ParamVector grad(start.size());

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < n;
         begin += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end =
          std::min(n, begin + static_cast<std::size_t>(hyper.batch_size));
      const double inv = 1.0 / static_cast<double>(end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) {
        accumulate_gradient(spec, result.params, train.x.row(order[i]),
                            train.y[order[i]], inv, grad);
      }
      add_scaled(result.params, -hyper.learning_rate, grad);
    }
    if (!all_finite(result.params)) {
      throw std::runtime_error(
          "local_train: parameters diverged (non-finite) in epoch " +
          std::to_string(epoch + 1) + "; lower the learning rate");
    }
  }
  return result;
}

}  // namespace ltfl
