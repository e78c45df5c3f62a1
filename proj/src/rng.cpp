#include "mrfcox/rng.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>

namespace mrfcox {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return splitmix64(splitmix64(root) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

Engine make_engine(std::uint64_t root, std::uint64_t stream) {
    return Engine(derive_seed(root, stream));
}

double draw_normal(Engine& rng, double mean, double sd) {
    boost::random::normal_distribution<double> dist(mean, sd);
    return dist(rng);
}

double draw_gamma(Engine& rng, double shape, double rate) {
    boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

double draw_uniform(Engine& rng) {
    boost::random::uniform_01<double> dist;
    return dist(rng);
}

double draw_open_uniform(Engine& rng) {
    // 53 random bits, offset by half a step
    const std::uint64_t bits = rng() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double draw_exponential(Engine& rng, double rate) {
    return -std::log(draw_open_uniform(rng)) / rate;
}

std::uint64_t draw_index(Engine& rng, std::uint64_t lo, std::uint64_t hi) {
    boost::random::uniform_int_distribution<std::uint64_t> dist(lo, hi);
    return dist(rng);
}

} // namespace mrfcox
