#include "cohortsim/rng.hpp"

namespace cohortsim {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t RngStreams::seed_for(std::string_view name, std::uint64_t salt) const
{
    // FNV-1a over the stream name keeps the mapping platform independent.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(root_ ^ h) + salt);
}

} // namespace cohortsim
