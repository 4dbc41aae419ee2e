#ifndef RVR_RNG_HPP
#define RVR_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace rvr {

using Rng = std::mt19937_64;

/// Independent named stream derived from a run seed. Every source of
/// randomness (component sampling, coin flips, each worker's compressor)
/// owns its own stream, so adding or removing draws from one source never
/// shifts another.
Rng make_stream(std::uint64_t seed, std::string_view name);

/// Same as above with an integer suffix, e.g. per-worker streams.
Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index);

/// Bernoulli(p) draw; p >= 1 always succeeds without consuming randomness.
bool flip(Rng& rng, double p);

}  // namespace rvr

#endif  // RVR_RNG_HPP
