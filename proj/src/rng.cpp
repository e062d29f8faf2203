#include "spiked/rng.hpp"

#include <cmath>
#include <numbers>

namespace spiked {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterStream::at(std::uint64_t k) const {
    return mix64(key_ + (k + 1) * kGolden);
}

double CounterStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id) {
    return mix64(mix64(seed) ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

std::vector<double> normal_vector(std::size_t n, std::uint64_t seed, std::uint64_t stream_id) {
    CounterStream s(stream_key(seed, stream_id));
    std::vector<double> out(n);
    for (auto& x : out) x = s.normal();
    return out;
}

}  // namespace spiked
