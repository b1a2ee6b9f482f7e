#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace embeval::rng {

// Counter-based generator: Threefry-2x64, 20 rounds, as specified in
// Salmon et al., "Parallel Random Numbers: As Easy as 1, 2, 3" (SC'11).
// Constants below are the published ones; every stream is reproducible
// from (seed, stream_id) alone, independent of call interleaving, so any
// implementation of the same algorithm regenerates identical data.
inline constexpr char kAlgorithmId[] = "threefry2x64-20/box-muller/v1";

inline constexpr std::uint64_t kThreefryParity = 0x1BD11BDAA9FC1A22ull;
inline constexpr int kThreefryRounds = 20;
inline constexpr int kRotations2x64[8] = {16, 42, 12, 31, 16, 32, 24, 21};

std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> counter,
                                          std::array<std::uint64_t, 2> key);

// Maps a 64-bit word to the open interval (0,1); never returns an endpoint,
// so log(u) and Box-Muller stay finite.
double to_unit_open(std::uint64_t word);

// Purpose tags composed into stream ids; documented so sidecar metadata
// identifies which stream produced which artifact.
enum StreamPurpose : std::uint64_t {
    kStreamSynthPoints = 1,
    kStreamSynthMeans = 2,
    kStreamHeadDims = 3,
    kStreamHeadPartition = 4,
    kStreamTest = 100,
};

constexpr std::uint64_t stream_id(std::uint64_t purpose, std::uint64_t index) {
    return (purpose << 32) | (index & 0xffffffffull);
}

// One logical random stream keyed by (seed, stream_id). The block counter
// advances once per generated pair of words.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double next_unit();    // uniform on (0,1)
    double next_normal();  // standard normal via Box-Muller

    // Unbiased integer in [0, n) by rejection sampling.
    std::uint64_t uniform_below(std::uint64_t n);

  private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t block_ = 0;
    std::uint64_t cached_word_ = 0;
    bool has_word_ = false;
    double cached_normal_ = 0.0;
    bool has_normal_ = false;
};

// k distinct indices drawn uniformly from {0,...,n-1}, returned sorted.
std::vector<int> sample_without_replacement(int n, int k, Stream& stream);

// Fisher-Yates permutation of {0,...,n-1}.
std::vector<int> shuffled_indices(int n, Stream& stream);

}  // namespace embeval::rng
