#include "embeval/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "embeval/error.hpp"

namespace embeval::rng {

std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> counter,
                                          std::array<std::uint64_t, 2> key) {
    const std::uint64_t ks[3] = {key[0], key[1], kThreefryParity ^ key[0] ^ key[1]};
    std::uint64_t x0 = counter[0] + ks[0];
    std::uint64_t x1 = counter[1] + ks[1];
    for (int round = 0; round < kThreefryRounds; ++round) {
        x0 += x1;
        x1 = std::rotl(x1, kRotations2x64[round % 8]);
        x1 ^= x0;
        if ((round + 1) % 4 == 0) {
            const std::uint64_t s = static_cast<std::uint64_t>(round + 1) / 4;
            x0 += ks[s % 3];
            x1 += ks[(s + 1) % 3] + s;
        }
    }
    return {x0, x1};
}

double to_unit_open(std::uint64_t word) {
    // 52 high bits, centered in the bin: ((w >> 12) + 0.5) * 2^-52.
    // Both endpoints are exactly representable, so the result never
    // rounds to 0 or 1.
    return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

std::uint64_t Stream::next_u64() {
    if (has_word_) {
        has_word_ = false;
        return cached_word_;
    }
    const auto out = threefry2x64({block_++, 0}, key_);
    cached_word_ = out[1];
    has_word_ = true;
    return out[0];
}

double Stream::next_unit() { return to_unit_open(next_u64()); }

double Stream::next_normal() {
    if (has_normal_) {
        has_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_normal_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Stream::uniform_below(std::uint64_t n) {
    if (n == 0) throw InternalError("uniform_below: n must be positive");
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t word = next_u64();
        if (word >= reject_below) return word % n;
    }
}

std::vector<int> sample_without_replacement(int n, int k, Stream& stream) {
    if (k < 0 || k > n) throw InternalError("sample_without_replacement: k out of range");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(stream.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<int> shuffled_indices(int n, Stream& stream) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i + 1 < n; ++i) {
        const auto j = i + static_cast<int>(stream.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    return pool;
}

}  // namespace embeval::rng
