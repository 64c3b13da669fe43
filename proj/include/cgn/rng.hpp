#pragma once

#include <cstdint>

namespace cgn {

// SplitMix64; used directly as the uniform stream and to derive independent
// per-index substream seeds. Chosen over std::mt19937 +
// std::uniform_real_distribution because the standard distributions are not
// bit-reproducible across library implementations.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream_id);

// Inverse standard normal CDF (Wichura's AS241, double-precision branch).
// Portable and deterministic, unlike library normal distributions.
double normal_icdf(double p);

// One independent random stream, addressed by (master seed, stream id).
class RandomStream {
public:
    RandomStream(std::uint64_t master, std::uint64_t stream_id)
        : gen_{derive_stream_seed(master, stream_id)} {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Standard normal via inverse CDF on the uniform stream.
    double normal() {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return normal_icdf(u);
    }

private:
    SplitMix64 gen_;
};

} // namespace cgn
