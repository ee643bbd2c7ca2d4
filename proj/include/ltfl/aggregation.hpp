#pragma once

#include <optional>
#include <vector>

#include "ltfl/model.hpp"
#include "ltfl/param_vector.hpp"
#include "ltfl/rng.hpp"

namespace ltfl {

// One client's upload as the server sees it.
struct ClientUpdate {
  int client_id = 0;
  ParamVector params;                  // possibly zero-filled
  std::size_t num_samples = 0;         // local train-set size
  double local_loss = 0.0;             // train loss at the round-start model
  bool sufficient = true;
  double nominal_loss_ratio = 0.0;     // the link's configured drop rate
  double realized_drop_fraction = 0.0; // scalars actually zero-filled / dim
};

// Which r the 1/(1-r) compensation uses: the link's configured rate
// (unbiased by construction) or the fraction observed this round.
enum class Compensation { kNominal, kRealized };

// Normalization of the compensated sum.  kCompensatedMean divides the
// whole sum by n + m, which keeps the aggregate's expectation equal to the
// plain mean of the true updates.  kSplitNormalized reproduces the
// historical form (1/n) * sum(sufficient) + (1/m) * sum(compensated
// insufficient), which double-counts whenever both groups are non-empty;
// it is kept behind this switch for side-by-side comparison.
enum class AggregationForm { kCompensatedMean, kSplitNormalized };

// Zero-filled uploads shrink toward zero by factor (1 - r), so dividing
// by (1 - r) restores the update in expectation.  Sufficient uploads pass
// through untouched.  Empty when the whole upload was lost under
// kRealized (r == 1 cannot be compensated).
std::optional<ParamVector> tra_compensate(const ClientUpdate& update,
                                          Compensation mode);

// Unweighted mean of the updates, summed in client-id order.
ParamVector fedavg_aggregate(const std::vector<ClientUpdate>& updates);

ParamVector tra_fedavg_aggregate(const std::vector<ClientUpdate>& updates,
                                 Compensation mode, AggregationForm form);

// Fair aggregation: clients with higher local loss pull the global model
// harder, with strength controlled by q (q = 0 reduces to the plain mean).
struct QfflHyper {
  double q = 1.0;
  double lipschitz = 10.0;  // step-size surrogate L
};

// One server step from global model w given locally trained models:
//   dw_k = L * (w - w_k)
//   D_k  = F_k^q * dw_k
//   h_k  = q * F_k^(q-1) * |dw_k|^2 + L * F_k^q
//   w'   = w - sum(D_k) / sum(h_k)
// F_k is the client's train loss at w (update.local_loss).
ParamVector qffl_step(const ParamVector& w,
                      const std::vector<ClientUpdate>& updates,
                      const QfflHyper& hyper);

// Compensates each update, then applies qffl_step.  Updates whose entire
// payload was lost under kRealized are excluded.
ParamVector tra_qffl_step(const ParamVector& w,
                          const std::vector<ClientUpdate>& updates,
                          const QfflHyper& hyper, Compensation mode);

// Moreau-envelope personalization.  Each client keeps a personal model
// theta near its own optimum while its local copy of the global model
// drifts toward theta.
struct PfedmeHyper {
  double lambda = 15.0;       // prox weight tying theta to the local model
  int inner_steps = 5;        // gradient steps on theta per local round
  double personal_step = 0.005;
  double local_lr = 0.01;     // local-model step toward theta
  int local_rounds = 10;
  double beta = 1.0;          // server mixing weight, in (0, 2]
  int batch_size = 20;        // minibatch for the inner theta objective
};

struct PfedmeLocalResult {
  ParamVector local_w;  // client's drifted copy of the global model
  ParamVector theta;    // personal model after the final local round
};

// local_rounds repetitions of: sample a minibatch, take inner_steps
// gradient steps on f_batch(theta) + (lambda/2)|theta - w|^2 starting from
// the current w, then w <- w - local_lr * lambda * (w - theta).
PfedmeLocalResult pfedme_local(const ParamVector& global_w,
                               const ModelSpec& spec, const LabeledSet& train,
                               const PfedmeHyper& hyper, Rng& rng);

// w' = (1 - beta) * w + beta * mean(uploaded local models), with TRA
// compensation applied first when tra is set.
ParamVector pfedme_server_step(const ParamVector& w,
                               const std::vector<ClientUpdate>& updates,
                               double beta, bool tra, Compensation mode);

}  // namespace ltfl
