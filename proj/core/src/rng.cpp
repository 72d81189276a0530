#include "hyperenergy/rng.hpp"

namespace hyperenergy {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) {
    std::uint64_t h = fnv1a64(tag);
    h = splitmix64(h ^ splitmix64(master));
    h = splitmix64(h ^ splitmix64(index + 0x51ed270b74a4a9c5ull));
    return h;
}

std::mt19937_64 make_rng(std::uint64_t master, std::string_view tag,
                         std::uint64_t index) {
    return std::mt19937_64(derive_seed(master, tag, index));
}

std::vector<double> normal_draws(std::mt19937_64& rng, std::size_t count,
                                 double mean, double stddev) {
    std::normal_distribution<double> dist(mean, stddev);
    std::vector<double> out(count);
    for (double& v : out) v = dist(rng);
    return out;
}

std::vector<double> uniform_draws(std::mt19937_64& rng, std::size_t count,
                                  double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(count);
    for (double& v : out) v = dist(rng);
    return out;
}

} // namespace hyperenergy
