#include "ltfl/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltfl {

namespace {

// Indices into `updates`, ordered by client id.  All aggregation sums run
// in this order so results do not depend on arrival order.
std::vector<std::size_t> sorted_order(const std::vector<ClientUpdate>& updates) {
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return updates[a].client_id < updates[b].client_id;
  });
  return order;
}

void check_dims(const std::vector<ClientUpdate>& updates) {
  for (const auto& u : updates) {
    if (u.params.size() != updates.front().params.size()) {
      throw std::invalid_argument("aggregate: update dimension mismatch");
    }
  }
}

ParamVector mean_in_order(const std::vector<const ParamVector*>& parts) {
  ParamVector acc(parts.front()->size(), 0.0);
  for (const ParamVector* p : parts) add_scaled(acc, 1.0, *p);
  scale(acc, 1.0 / static_cast<double>(parts.size()));
  return acc;
}

double effective_loss_ratio(const ClientUpdate& u, Compensation mode) {
  return mode == Compensation::kNominal ? u.nominal_loss_ratio
                                        : u.realized_drop_fraction;
}

}  // namespace

std::optional<ParamVector> tra_compensate(const ClientUpdate& update,
                                          Compensation mode) {
  if (update.sufficient) return update.params;
  const double r = effective_loss_ratio(update, mode);
  if (r < 0.0 || r > 1.0) {
    throw std::invalid_argument("tra_compensate: loss ratio outside [0, 1]");
  }
  if (r >= 1.0) return std::nullopt;  // nothing arrived; nothing to rescale
  if (r == 0.0) return update.params;
  ParamVector scaled_params = update.params;
  scale(scaled_params, 1.0 / (1.0 - r));
  return scaled_params;
}

ParamVector fedavg_aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) {
    throw std::invalid_argument("fedavg_aggregate: no updates");
  }
  check_dims(updates);
  std::vector<const ParamVector*> parts;
  parts.reserve(updates.size());
  for (std::size_t i : sorted_order(updates)) {
    parts.push_back(&updates[i].params);
  }
  return mean_in_order(parts);
}

ParamVector tra_fedavg_aggregate(const std::vector<ClientUpdate>& updates,
                                 Compensation mode, AggregationForm form) {
  if (updates.empty()) {
    throw std::invalid_argument("tra_fedavg_aggregate: no updates");
  }
  check_dims(updates);
  const auto order = sorted_order(updates);

  if (form == AggregationForm::kCompensatedMean) {
    // Mean over all admitted clients; uploads that vanished entirely are
    // excluded (their compensation is undefined).
    std::vector<ParamVector> compensated;
    compensated.reserve(updates.size());
    for (std::size_t i : order) {
      if (auto c = tra_compensate(updates[i], mode)) {
        compensated.push_back(std::move(*c));
      }
    }
    if (compensated.empty()) {
      throw std::runtime_error(
          "tra_fedavg_aggregate: every upload was fully lost");
    }
    std::vector<const ParamVector*> parts;
    parts.reserve(compensated.size());
    for (const auto& c : compensated) parts.push_back(&c);
    return mean_in_order(parts);
  }

  // Split normalization: each group averaged by its own size.  With both
  // groups non-empty this sums two full-magnitude models — kept only for
  // comparison against the compensated mean.
  ParamVector sum_sufficient(updates.front().params.size(), 0.0);
  ParamVector sum_insufficient(updates.front().params.size(), 0.0);
  std::size_t n = 0;
  std::size_t m = 0;
  for (std::size_t i : order) {
    const ClientUpdate& u = updates[i];
    if (u.sufficient) {
      add_scaled(sum_sufficient, 1.0, u.params);
      ++n;
    } else if (auto c = tra_compensate(u, mode)) {
      add_scaled(sum_insufficient, 1.0, *c);
      ++m;
    }
  }
  if (n == 0 && m == 0) {
    throw std::runtime_error(
        "tra_fedavg_aggregate: every upload was fully lost");
  }
  ParamVector result(updates.front().params.size(), 0.0);
  if (n > 0) add_scaled(result, 1.0 / static_cast<double>(n), sum_sufficient);
  if (m > 0) add_scaled(result, 1.0 / static_cast<double>(m), sum_insufficient);
  return result;
}

ParamVector qffl_step(const ParamVector& w,
                      const std::vector<ClientUpdate>& updates,
                      const QfflHyper& hyper) {
  if (updates.empty()) throw std::invalid_argument("qffl_step: no updates");
  if (hyper.q < 0.0) throw std::invalid_argument("qffl_step: q < 0");
  if (hyper.lipschitz <= 0.0) {
    throw std::invalid_argument("qffl_step: lipschitz <= 0");
  }
  check_dims(updates);
  if (w.size() != updates.front().params.size()) {
    throw std::invalid_argument("qffl_step: dimension mismatch");
  }

  const double L = hyper.lipschitz;
  ParamVector numer(w.size(), 0.0);
  double denom = 0.0;
  ParamVector dw(w.size());
  for (std::size_t i : sorted_order(updates)) {
    const ClientUpdate& u = updates[i];
    if (u.local_loss < 0.0 || !std::isfinite(u.local_loss)) {
      throw std::invalid_argument("qffl_step: bad local loss");
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      dw[j] = L * (w[j] - u.params[j]);
    }
    // The floor keeps F^(q-1) finite at zero loss; pow(x, 0) == 1 exactly,
    // so q == 0 still reduces to the unweighted mean.
    const double f = u.local_loss + 1e-10;
    const double fq = std::pow(f, hyper.q);
    const double h =
        hyper.q * std::pow(f, hyper.q - 1.0) * squared_norm(dw) + L * fq;
    add_scaled(numer, fq, dw);
    denom += h;
  }
  if (!(denom > 0.0)) {
    throw std::runtime_error("qffl_step: degenerate step (sum of h is 0)");
  }
  ParamVector next = w;
  add_scaled(next, -1.0 / denom, numer);
  return next;
}

ParamVector tra_qffl_step(const ParamVector& w,
                          const std::vector<ClientUpdate>& updates,
                          const QfflHyper& hyper, Compensation mode) {
  if (updates.empty()) {
    throw std::invalid_argument("tra_qffl_step: no updates");
  }
  std::vector<ClientUpdate> compensated;
  compensated.reserve(updates.size());
  for (const ClientUpdate& u : updates) {
    if (auto c = tra_compensate(u, mode)) {
      ClientUpdate copy = u;
      copy.params = std::move(*c);
      compensated.push_back(std::move(copy));
    }
  }
  if (compensated.empty()) {
    throw std::runtime_error("tra_qffl_step: every upload was fully lost");
  }
  return qffl_step(w, compensated, hyper);
}

PfedmeLocalResult pfedme_local(const ParamVector& global_w,
                               const ModelSpec& spec, const LabeledSet& train,
                               const PfedmeHyper& hyper, Rng& rng) {
  if (hyper.lambda <= 0.0) {
    throw std::invalid_argument("pfedme_local: lambda <= 0");
  }
  if (hyper.inner_steps < 1) {
    throw std::invalid_argument("pfedme_local: inner_steps < 1");
  }
  if (hyper.local_rounds < 1) {
    throw std::invalid_argument("pfedme_local: local_rounds < 1");
  }
  if (hyper.batch_size < 1) {
    throw std::invalid_argument("pfedme_local: batch_size < 1");
  }
  if (hyper.personal_step < 0.0 || hyper.local_lr < 0.0) {
    throw std::invalid_argument("pfedme_local: negative step size");
  }
  if (train.size() == 0) {
    throw std::invalid_argument("pfedme_local: empty train set");
  }
  if (global_w.size() != spec.dim()) {
    throw std::invalid_argument("pfedme_local: params do not match spec");
  }

  const std::size_t n = train.size();
  const std::size_t batch =
      std::min<std::size_t>(n, static_cast<std::size_t>(hyper.batch_size));
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);

  PfedmeLocalResult result;
  result.local_w = global_w;
  result.theta = global_w;
  ParamVector grad(global_w.size());

  for (int r = 0; r < hyper.local_rounds; ++r) {
    // One minibatch per local round; the inner steps all use it.
    const std::vector<std::size_t> chosen = rng.sample(ids, batch);
    const double inv = 1.0 / static_cast<double>(chosen.size());

    result.theta = result.local_w;
    for (int s = 0; s < hyper.inner_steps; ++s) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i : chosen) {
        accumulate_gradient(spec, result.theta, train.x.row(i), train.y[i],
                            inv, grad);
      }
      // Prox pull toward the local model.
      add_scaled(grad, hyper.lambda, result.theta);
      add_scaled(grad, -hyper.lambda, result.local_w);
      add_scaled(result.theta, -hyper.personal_step, grad);
    }
    const double pull = hyper.local_lr * hyper.lambda;
    for (std::size_t j = 0; j < result.local_w.size(); ++j) {
      result.local_w[j] -= pull * (result.local_w[j] - result.theta[j]);
    }
    if (!all_finite(result.local_w) || !all_finite(result.theta)) {
      throw std::runtime_error(
          "pfedme_local: parameters diverged (non-finite); lower the steps");
    }
  }
  return result;
}

ParamVector pfedme_server_step(const ParamVector& w,
                               const std::vector<ClientUpdate>& updates,
                               double beta, bool tra, Compensation mode) {
  if (updates.empty()) {
    throw std::invalid_argument("pfedme_server_step: no updates");
  }
  if (!(beta > 0.0 && beta <= 2.0)) {
    throw std::invalid_argument("pfedme_server_step: beta outside (0, 2]");
  }
  check_dims(updates);
  if (w.size() != updates.front().params.size()) {
    throw std::invalid_argument("pfedme_server_step: dimension mismatch");
  }

  ParamVector mean;
  if (tra) {
    mean = tra_fedavg_aggregate(updates, mode,
                                AggregationForm::kCompensatedMean);
  } else {
    mean = fedavg_aggregate(updates);
  }
  ParamVector next(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    next[j] = (1.0 - beta) * w[j] + beta * mean[j];
  }
  return next;
}

}  // namespace ltfl
