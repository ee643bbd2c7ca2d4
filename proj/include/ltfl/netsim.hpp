#pragma once

#include <optional>
#include <vector>

#include "ltfl/param_vector.hpp"
#include "ltfl/rng.hpp"

namespace ltfl {

// A client's uplink for the whole run.  Sufficiency is static: a client is
// either good enough to retransmit until everything lands, or it is not.
struct NetworkProfile {
  int client_id = 0;
  bool sufficient = true;
  double loss_ratio = 0.0;  // per-packet drop probability, in [0, 1)
  std::optional<double> upload_mbps;
};

// Exactly floor((1 - eligible_ratio) * num_clients) clients become
// insufficient with the given loss ratio, chosen uniformly at random.
// The insufficient set is a prefix of one seeded permutation, so for a
// fixed rng seed the sets are nested across eligible ratios.
std::vector<NetworkProfile> assign_profiles(int num_clients,
                                            double eligible_ratio,
                                            double loss_ratio, Rng& rng);

// The one-bit flag a client reports before training starts.
inline bool sufficiency_report(const NetworkProfile& p) {
  return p.sufficient;
}

struct TransmitResult {
  ParamVector received;
  int packets_total = 0;
  int packets_dropped = 0;      // drops on the first attempt
  int retransmissions = 0;      // extra rounds a sufficient client needed
  double drop_fraction = 0.0;   // zero-filled scalars / total scalars
};

// Zero-fills the scalars of dropped packets.  Packets are contiguous runs
// of packet_size scalars; the last packet may be short.
ParamVector apply_packet_drops(const ParamVector& params, int packet_size,
                               const std::vector<bool>& dropped,
                               std::size_t* scalars_dropped = nullptr);

// Uploads params over the profile's link.  Each packet drops independently
// with probability loss_ratio.  Sufficient clients retransmit missing
// packets until everything arrives; insufficient clients send once and the
// server zero-fills the holes.
TransmitResult transmit(const ParamVector& params,
                        const NetworkProfile& profile, int packet_size,
                        Rng& rng);

enum class TimeModel {
  kZeroFill,     // lossy clients send once; holes are tolerated
  kRetransmit,   // every client repeats until delivery
};

// Wall-clock cost of the slowest upload among the given clients.  A lossy
// link that must retransmit pays ceil(r / (1 - r)) extra full rounds.
// Sufficient clients always retransmit; insufficient ones only under
// kRetransmit.  Empty if any profile lacks an upload speed.
std::optional<double> round_time(const std::vector<NetworkProfile>& profiles,
                                 double payload_bytes, TimeModel model);

}  // namespace ltfl
