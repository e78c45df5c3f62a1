#pragma once

#include <cstdint>
#include <random>

namespace mrfcox {

/**
 * Random streams. Every stream is a std::mt19937_64 seeded with
 * derive_seed(root, stream), where derive_seed is a SplitMix64 mix of the two
 * words. Variates come from Boost.Random distributions, whose algorithms are
 * fixed in the headers, so draws are identical across platforms and standard
 * libraries.
 *
 * Derivation tree used across the project:
 *   root -> replicate stream (simulation), root -> chain stream (sampler),
 *   root -> graph-noise stream (scenario graphs).
 */
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);
Engine make_engine(std::uint64_t root, std::uint64_t stream);

double draw_normal(Engine& rng, double mean, double sd);
/// Gamma variate parameterised by shape and rate (mean shape / rate).
double draw_gamma(Engine& rng, double shape, double rate);
/// Uniform on [0, 1).
double draw_uniform(Engine& rng);
/// Uniform on the open interval (0, 1).
double draw_open_uniform(Engine& rng);
double draw_exponential(Engine& rng, double rate);
/// Uniform integer in [lo, hi].
std::uint64_t draw_index(Engine& rng, std::uint64_t lo, std::uint64_t hi);

} // namespace mrfcox
