#ifndef MOBMODEL_RNG_HPP
#define MOBMODEL_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace mobmodel {

// splitmix64; used for seeding and for deriving substream seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seedable, portable PRNG (xoshiro256**). The same seed produces the same
/// stream on every platform, which keeps every pipeline stage reproducible.
/// Substreams are derived from (seed, index) so independent units of work
/// (restarts, synthetic users) can be generated in any order.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t seed() const { return seed_; }

  // Substream i of substream j of seed s is stable no matter how many draws
  // either stream has made.
  Rng substream(std::uint64_t index) const {
    std::uint64_t sm = seed_ ^ (0xA0761D6478BD642FULL * (index + 1));
    return Rng(splitmix64_next(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Exponential draw with the given mean; mean <= 0 yields 0.
  double exponential(double mean) {
    if (mean <= 0.0) return 0.0;
    return -mean * std::log(1.0 - uniform01());
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// Sample an index from non-negative weights, proportionally to weight.
/// Zero-weight entries are never chosen. total must equal the sum of weights
/// (callers usually have it precomputed); returns weights.size() when all
/// weights are zero.
template <typename Weights>
std::size_t sample_weighted(Rng& rng, const Weights& weights, double total) {
  if (total <= 0.0) return weights.size();
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w <= 0.0) continue;
    last_positive = i;
    cum += w;
    if (u < cum) return i;
  }
  return last_positive;  // guards against round-off at the top end
}

}  // namespace mobmodel

#endif  // MOBMODEL_RNG_HPP
