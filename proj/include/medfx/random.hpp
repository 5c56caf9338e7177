#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace medfx {

/// 64-bit Mersenne Twister; its output sequence is fixed by the standard.
using Rng = std::mt19937_64;

/// Counter-based seed derivation: the stream for (master, counter) does not
/// depend on the order in which streams are requested.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter, std::uint64_t salt) noexcept;

Rng make_rng(std::uint64_t seed);

// Distribution helpers backed by Boost.Random, whose algorithms (unlike the
// std:: distributions) produce identical draws on every standard library.
double uniform01(Rng &rng);
double uniform(Rng &rng, double lo, double hi);
double standard_normal(Rng &rng);
std::size_t uniform_index(Rng &rng, std::size_t n);
bool bernoulli(Rng &rng, double p);

/// Portable Fisher-Yates shuffle.
template <typename T>
void shuffle_in_place(std::span<T> items, Rng &rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

template <typename T>
void shuffle_in_place(std::vector<T> &items, Rng &rng) {
    shuffle_in_place(std::span<T>(items), rng);
}

} // namespace medfx
