#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ltfl {

// Deterministic random streams.
//
// Every random draw in the simulator comes from a Rng seeded through
// derive_key(), which hashes a root seed together with integer tags
// (purpose, round, client id, ...).  Streams are therefore independent of
// each other and of execution order: running clients in parallel, or
// skipping a client entirely, never shifts the draws seen by another
// client.  std::* distributions are avoided on purpose — their output is
// implementation-defined and would break cross-platform reproducibility.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a root key and a list of integer tags into a stream key.
inline std::uint64_t derive_key(std::uint64_t root,
                                std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = root;
  std::uint64_t k = splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= t + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    k = splitmix64(s);
  }
  return k;
}

// Stream purposes.  Values are arbitrary but frozen: changing them would
// silently reshuffle every seeded experiment.
enum : std::uint64_t {
  kStreamDataShared = 1,
  kStreamDataClient = 2,
  kStreamProfiles = 3,
  kStreamSelect = 4,
  kStreamTrain = 5,
  kStreamNet = 6,
  kStreamModelInit = 7,
  kStreamDataset = 8,
};

// xoshiro256** with Box-Muller normals.  Small, fast, and identical on
// every platform we build for.
class Rng {
 public:
  explicit Rng(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& w : state_) w = splitmix64(s);
    has_cached_normal_ = false;
    cached_normal_ = 0.0;
  }

  Rng(std::uint64_t root, std::initializer_list<std::uint64_t> tags)
      : Rng(derive_key(root, tags)) {}

  std::uint64_t next_u64() {
    std::uint64_t* s = state_;
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller; second draw of each pair is cached.
  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    // u1 in (0, 1] so log(u1) is finite.
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

  double lognormal(double log_mean, double log_sigma) {
    return std::exp(log_mean + log_sigma * normal());
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Unbiased integer in [0, n).  Rejection sampling over the modulus.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x < threshold);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct elements drawn uniformly from pool, in draw order.
  template <typename T>
  std::vector<T> sample(std::vector<T> pool, std::size_t k) {
    if (k > pool.size()) k = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  bool has_cached_normal_;
  double cached_normal_;
};

}  // namespace ltfl
