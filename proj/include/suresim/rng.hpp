#pragma once

// Deterministic random plumbing.  Every randomized routine takes an explicit
// 64-bit seed and derives sub-seeds through splitmix64, so runs reproduce
// bit-for-bit across platforms and so redraw k never depends on how many
// redraws run after it.  We map engine words to doubles and bounded ints
// ourselves instead of using std distributions, whose output sequences are
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace suresim {

// One step of the splitmix64 sequence; advances state and returns the output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable sub-seed for (stream, index) under a base seed.  Streams keep
// unrelated consumers (bank generation, partitioning, redraw loops) from
// sharing sequences even when their indices collide.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    std::uint64_t s = base;
    std::uint64_t mixed = splitmix64(s);
    s = mixed ^ (0x6a09e667f3bcc909ULL + stream);
    mixed = splitmix64(s);
    s = mixed ^ (0xbb67ae8584caa73bULL + index);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_unit() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform integer in [0, n) by rejection, so every n is exactly unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t draw;
        do {
            draw = eng_();
        } while (draw >= limit);
        return draw % n;
    }

    // Mean-zero Gaussian via Box-Muller on our own uniforms.
    double next_gaussian(double stddev) {
        double u1;
        do {
            u1 = next_unit();
        } while (u1 <= 0.0);
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 eng_;
};

// Fisher-Yates shuffle driven by our own bounded draws.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace suresim
