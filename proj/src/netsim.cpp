#include "ltfl/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltfl {

std::vector<NetworkProfile> assign_profiles(int num_clients,
                                            double eligible_ratio,
                                            double loss_ratio, Rng& rng) {
  if (num_clients < 1) {
    throw std::invalid_argument("assign_profiles: num_clients < 1");
  }
  if (!(eligible_ratio > 0.0 && eligible_ratio <= 1.0)) {
    throw std::invalid_argument(
        "assign_profiles: eligible_ratio outside (0, 1]");
  }
  if (!(loss_ratio >= 0.0 && loss_ratio < 1.0)) {
    throw std::invalid_argument("assign_profiles: loss_ratio outside [0, 1)");
  }

  // Epsilon guards the floor against cases like (1 - 0.9) * 100 landing
  // a hair under the intended integer.
  const int num_insufficient = static_cast<int>(
      std::floor((1.0 - eligible_ratio) * num_clients + 1e-9));

  std::vector<int> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);

  std::vector<NetworkProfile> profiles(num_clients);
  for (int i = 0; i < num_clients; ++i) {
    NetworkProfile& p = profiles[ids[i]];
    p.client_id = ids[i];
    p.sufficient = i >= num_insufficient;
    p.loss_ratio = p.sufficient ? 0.0 : loss_ratio;
  }
  return profiles;
}

ParamVector apply_packet_drops(const ParamVector& params, int packet_size,
                               const std::vector<bool>& dropped,
                               std::size_t* scalars_dropped) {
  if (packet_size < 1) {
    throw std::invalid_argument("apply_packet_drops: packet_size < 1");
  }
  const std::size_t num_packets =
      (params.size() + packet_size - 1) / static_cast<std::size_t>(packet_size);
  if (dropped.size() != num_packets) {
    throw std::invalid_argument("apply_packet_drops: mask/packet mismatch");
  }
  ParamVector received = params;
  std::size_t zeroed = 0;
  for (std::size_t p = 0; p < num_packets; ++p) {
    if (!dropped[p]) continue;
    const std::size_t begin = p * static_cast<std::size_t>(packet_size);
    const std::size_t end =
        std::min(params.size(), begin + static_cast<std::size_t>(packet_size));
    std::fill(received.begin() + begin, received.begin() + end, 0.0);
    zeroed += end - begin;
  }
  if (scalars_dropped) *scalars_dropped = zeroed;
  return received;
}

TransmitResult transmit(const ParamVector& params,
                        const NetworkProfile& profile, int packet_size,
                        Rng& rng) {
  if (packet_size < 1) {
    throw std::invalid_argument("transmit: packet_size < 1");
  }
  if (!(profile.loss_ratio >= 0.0 && profile.loss_ratio < 1.0)) {
    throw std::invalid_argument("transmit: loss_ratio outside [0, 1)");
  }
  if (params.empty()) {
    throw std::invalid_argument("transmit: empty payload");
  }

  const std::size_t num_packets =
      (params.size() + packet_size - 1) / static_cast<std::size_t>(packet_size);

  TransmitResult result;
  result.packets_total = static_cast<int>(num_packets);

  // Loss-free links skip the rng entirely, so a run with r == 0 consumes
  // exactly the same random streams as one with the network disabled.
  if (profile.loss_ratio == 0.0) {
    result.received = params;
    return result;
  }

  std::vector<bool> dropped(num_packets);
  int first_drops = 0;
  for (std::size_t p = 0; p < num_packets; ++p) {
    dropped[p] = rng.bernoulli(profile.loss_ratio);
    if (dropped[p]) ++first_drops;
  }
  result.packets_dropped = first_drops;

  if (!profile.sufficient) {
    std::size_t zeroed = 0;
    result.received = apply_packet_drops(params, packet_size, dropped, &zeroed);
    result.drop_fraction =
        static_cast<double>(zeroed) / static_cast<double>(params.size());
    return result;
  }

  // Sufficient link: repeat the missing packets until all arrive.  Only
  // the attempt count matters for the caller; payload is intact.
  int missing = first_drops;
  while (missing > 0) {
    ++result.retransmissions;
    int still_missing = 0;
    for (int p = 0; p < missing; ++p) {
      if (rng.bernoulli(profile.loss_ratio)) ++still_missing;
    }
    missing = still_missing;
  }
  result.received = params;
  return result;
}

std::optional<double> round_time(const std::vector<NetworkProfile>& profiles,
                                 double payload_bytes, TimeModel model) {
  if (profiles.empty()) {
    throw std::invalid_argument("round_time: no profiles");
  }
  if (payload_bytes <= 0.0) {
    throw std::invalid_argument("round_time: payload_bytes <= 0");
  }
  double worst = 0.0;
  for (const auto& p : profiles) {
    if (!p.upload_mbps) return std::nullopt;
    if (*p.upload_mbps <= 0.0) {
      throw std::invalid_argument("round_time: upload speed <= 0");
    }
    const double base = payload_bytes * 8.0 / (*p.upload_mbps * 1e6);
    double extra_rounds = 0.0;
    const bool retransmits =
        p.sufficient || model == TimeModel::kRetransmit;
    if (retransmits && p.loss_ratio > 0.0) {
      extra_rounds = std::ceil(p.loss_ratio / (1.0 - p.loss_ratio));
    }
    worst = std::max(worst, base * (1.0 + extra_rounds));
  }
  return worst;
}

}  // namespace ltfl
