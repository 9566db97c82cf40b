#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

namespace rrn {

// Thin wrapper over mt19937_64. The standard distributions are not
// specified bit-for-bit across library implementations, so the conversions
// to uniform/normal/index are done here to keep every seeded draw portable.
class rng {
public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform index in [0, n); rejection sampling removes modulo bias
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    // Box-Muller; the spare value is discarded so draws stay stateless
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // derive an independent stream, e.g. one per phase or per worker
    std::uint64_t fork_seed() { return engine_() ^ 0x9e3779b97f4a7c15ULL; }

private:
    std::mt19937_64 engine_;
};

template <class Container>
void shuffle(Container& items, rng& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = gen.index(i);
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace rrn
