#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cohortsim {

using Rng = std::mt19937_64;

/// One root seed fans out into named, statistically independent streams
/// ("city", "cohorting", "disease", "interventions", ...). Changing how much
/// randomness one subsystem consumes never perturbs another.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t root_seed) : root_(root_seed) {}

    std::uint64_t root() const { return root_; }
    std::uint64_t seed_for(std::string_view name, std::uint64_t salt = 0) const;
    Rng stream(std::string_view name, std::uint64_t salt = 0) const { return Rng{seed_for(name, salt)}; }

private:
    std::uint64_t root_;
};

std::uint64_t splitmix64(std::uint64_t x);

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline bool bernoulli(Rng& rng, double p)
{
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01(rng) < p;
}

} // namespace cohortsim
