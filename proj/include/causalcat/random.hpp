#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace causalcat {

/// Seeded generator whose output sequence depends only on the seed.
/// std::mt19937_64 is fully specified by the standard; the distributions in
/// <random> are not, so the helpers below derive values from raw draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Independent child stream, e.g. one per fold or per grid cell.
    Rng split(std::uint64_t salt) {
        std::seed_seq seq{static_cast<std::uint32_t>(engine_()), static_cast<std::uint32_t>(salt),
                          static_cast<std::uint32_t>(salt >> 32)};
        std::uint64_t s = 0;
        std::uint32_t out[2];
        seq.generate(out, out + 2);
        s = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        return Rng(s);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace causalcat
