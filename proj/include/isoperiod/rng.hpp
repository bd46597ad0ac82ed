#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace isoperiod {

/// Seeded generator whose output sequence is fixed across platforms.
/// std distributions are implementation-defined, so the uniform and
/// normal transforms are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Stream for item `index` of a run seeded with `seed`.
    static Rng for_item(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index),
                          std::uint32_t(index >> 32)};
        std::mt19937_64 e(seq);
        return Rng(e());
    }

    /// Uniform on [0, 1).
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Box-Muller, cosine branch only).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace isoperiod
