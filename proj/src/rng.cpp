#include "rieszreg/rng.hpp"

#include <cmath>
#include <numbers>

namespace rieszreg {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t SplitMix64::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t SplitMix64::split(std::uint64_t seed, std::uint64_t index) {
    return mix(seed + (index + 1) * kGolden);
}

std::uint64_t SplitMix64::next_u64() {
    state_ += kGolden;
    return mix(state_);
}

double SplitMix64::next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

std::vector<int> SplitMix64::permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

}  // namespace rieszreg
