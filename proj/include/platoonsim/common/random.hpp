#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace psim {

// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
// is pinned by the standard) and derives all values with fixed arithmetic so
// that results are bit-identical across platforms and library versions.
// std::uniform_*_distribution is implementation-defined and never used here.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_index(std::uint64_t n) {
        return engine_() % n;
    }

    int next_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(next_index(
            static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    // Fisher-Yates shuffle, deterministic for a given stream state.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent child stream; used to give each episode/component
    // its own sequence without coupling draw counts.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_id) {
        // SplitMix64 mixing of (base, stream_id).
        std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace psim
