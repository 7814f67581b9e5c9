#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace rieszreg {

// Counter-based 64-bit generator (SplitMix64). The full stream recipe, so other
// implementations can reproduce draws exactly:
//
//   state_0 = mix(seed ^ fnv1a64(purpose))       -- keyed stream start
//   state_{t+1} = state_t + 0x9E3779B97F4A7C15   -- golden-ratio increment
//   output_t = mix(state_{t+1})                  -- David Stafford's mix13
//
// with mix(z) = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9, then
//      (z ^ (z >> 27)) * 0x94D049BB133111EB, then z ^ (z >> 31).
//
// Uniforms take the top 53 bits: u = ((out >> 11) + 0.5) * 2^-53, in (0,1).
// Normals are Box-Muller pairs (sqrt(-2 ln u1) cos/sin(2 pi u2)); the sine
// value is cached, so normal draws consume two uniforms per pair.
// split(seed, i) = mix(seed + (i + 1) * 0x9E3779B97F4A7C15) derives the
// per-replication seed i from a master seed.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(mix(seed)) {}
    SplitMix64(std::uint64_t seed, std::string_view purpose)
        : state_(mix(seed ^ fnv1a64(purpose))) {}

    static std::uint64_t mix(std::uint64_t z);
    static std::uint64_t fnv1a64(std::string_view s);
    static std::uint64_t split(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64();
    double next_uniform();      // in (0, 1)
    double next_normal();       // standard normal
    // Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<int> permutation(int n);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rieszreg
