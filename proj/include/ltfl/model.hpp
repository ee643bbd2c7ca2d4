#pragma once

#include <cstdint>

#include "ltfl/dataset.hpp"
#include "ltfl/param_vector.hpp"
#include "ltfl/rng.hpp"

namespace ltfl {

enum class ModelKind { kLogistic, kMlp };

// Parameter layout:
//   logistic: [W (classes x features, row-major) | bias (classes)]
//   mlp:      [W1 (hidden x features) | b1 (hidden) |
//              W2 (classes x hidden)  | b2 (classes)], tanh hidden layer.
struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  int features = 60;
  int classes = 10;
  int hidden_units = 0;  // mlp only

  std::size_t dim() const;
};

struct TrainHyper {
  double learning_rate = 0.1;
  int epochs = 1;
  int batch_size = 10;
};

// Logistic models start at zero; mlp weights are Xavier-uniform from the
// given seed.  Same spec + seed always gives the same vector.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed = 0);

// Cross-entropy loss of one sample.  Softmax is computed with
// max-subtraction so large logits stay finite.
double sample_loss(const ModelSpec& spec, const ParamVector& params,
                   const double* x, int y);

// Adds weight * dLoss(x, y)/dParams to grad.
void accumulate_gradient(const ModelSpec& spec, const ParamVector& params,
                         const double* x, int y, double weight,
                         ParamVector& grad);

// Predicted class; ties resolve to the lowest class index.
int predict(const ModelSpec& spec, const ParamVector& params,
            const double* x);

// Mean loss / accuracy over a set.  Empty sets are an error: silently
// returning 0 would read as "model is wrong about everything".
double evaluate_loss(const ModelSpec& spec, const ParamVector& params,
                     const LabeledSet& set);
double evaluate_accuracy(const ModelSpec& spec, const ParamVector& params,
                         const LabeledSet& set);

struct TrainResult {
  ParamVector params;
  double initial_loss;  // mean train loss at the starting parameters
};

// epochs passes of minibatch SGD over the client's train set.  Batch order
// is reshuffled from rng each epoch; the trailing partial batch is kept.
// Throws if the loss or parameters go non-finite.
TrainResult local_train(const ParamVector& start, const ModelSpec& spec,
                        const LabeledSet& train, const TrainHyper& hyper,
                        Rng& rng);

}  // namespace ltfl
