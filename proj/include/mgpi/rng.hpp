#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mgpi {

/// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
/// is fixed by the standard) and maps draws without the standard library's
/// unspecified distribution adaptors, so results are reproducible across
/// platforms and toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi], inclusive, bias-free via rejection.
    int uniform_int(int lo, int hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x = next_u64();
        while (x >= bound) x = next_u64();
        return lo + static_cast<int>(x % range);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(uniform_int(0, i))]);
        }
    }

    /// Independent substream derived from the original seed and a stream id;
    /// does not consume state from this stream.
    Rng fork(std::uint64_t stream) const { return Rng(mix(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1))); }

    std::uint64_t seed() const { return seed_; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace mgpi
