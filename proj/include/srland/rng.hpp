#pragma once

#include <cmath>
#include <cstdint>

namespace srland {

// All randomness in the library flows through this generator so that runs are
// reproducible bit-for-bit from a single root seed, independent of the
// standard library implementation (std distributions are not portable).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// Substream derivation: every consumer gets its own seed computed from
// (root, stream, counter). Streams are fixed tags (see pipeline.cpp); the
// counter separates trials. Changing the root seed changes every substream.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t counter = 0) {
    SplitMix64 g(root ^ (stream * 0xbf58476d1ce4e5b9ULL) ^
                 (counter * 0x94d049bb133111ebULL));
    g.next();
    return g.next();
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_.next(); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = gen_.next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller on explicit uniforms; reproducible
    // everywhere, unlike std::normal_distribution.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        double u1 = static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;
        double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    SplitMix64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace srland
