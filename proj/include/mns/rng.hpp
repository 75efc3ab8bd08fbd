#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mns {

/// Derives an independent stream seed from a master seed. Every random
/// choice in the project draws from a stream obtained this way, so a single
/// --seed pins the whole run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// mt19937_64 with explicit distribution code. The standard specifies the
/// engine bit-exactly but not the <random> distributions, so the mappings
/// from raw draws to doubles live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0,1) with 53 random mantissa bits.
    double uniform01();

    /// Uniform in [lo,hi).
    double uniform(double lo, double hi);

    /// Unbiased uniform integer in [0,n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller (no cached spare).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Fisher-Yates shuffle with this engine.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace mns
