#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hyperenergy {

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 14695981039346656037ull);

/// Derives an independent sub-seed from one master seed. Every source of
/// randomness in a run (init, shuffles, synthesis, ...) pulls its stream
/// through a distinct tag so that adding or reordering consumers does not
/// perturb the others.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

std::mt19937_64 make_rng(std::uint64_t master, std::string_view tag,
                         std::uint64_t index = 0);

std::vector<double> normal_draws(std::mt19937_64& rng, std::size_t count,
                                 double mean = 0.0, double stddev = 1.0);

std::vector<double> uniform_draws(std::mt19937_64& rng, std::size_t count,
                                  double lo, double hi);

} // namespace hyperenergy
