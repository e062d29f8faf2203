#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace spiked {

// Counter-based SplitMix64 stream. Output k of the stream keyed by `key` is
// mix64(key + (k + 1) * 0x9E3779B97F4A7C15), so any position can be reached
// without replaying the prefix.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) : key_(key) {}

    std::uint64_t at(std::uint64_t k) const;
    std::uint64_t next() { return at(counter_++); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller; both outputs of a pair are used.
    double normal();

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

// Key for an independent sub-stream of `seed`. Stream ids are used to keep
// the noise tensor, each spike component and each random init apart.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id);

std::vector<double> normal_vector(std::size_t n, std::uint64_t seed, std::uint64_t stream_id);

namespace streams {
inline constexpr std::uint64_t noise = 0;
inline constexpr std::uint64_t component_base = 0x100;   // + mode (+ 0x10 * rank index)
inline constexpr std::uint64_t init_base = 0x1000;       // + mode + 0x10 * restart
inline constexpr std::uint64_t probe_base = 0x10000;     // independent contraction vectors
}  // namespace streams

}  // namespace spiked
