#include "medfx/random.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace medfx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter, std::uint64_t salt) noexcept {
    return derive_seed(derive_seed(master, counter), salt);
}

Rng make_rng(std::uint64_t seed) { return Rng(seed); }

double uniform01(Rng &rng) { return boost::random::uniform_01<double>()(rng); }

double uniform(Rng &rng, double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

double standard_normal(Rng &rng) { return boost::random::normal_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng &rng, std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool bernoulli(Rng &rng, double p) { return boost::random::bernoulli_distribution<double>(p)(rng); }

} // namespace medfx
