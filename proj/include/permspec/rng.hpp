#pragma once

#include <cstdint>
#include <random>

namespace permspec {

using Rng = std::mt19937_64;

// One splitmix64 output step applied to x (stateless form).
std::uint64_t splitmix64(std::uint64_t x);

// Per-trial generator. The seed is
//   splitmix64(splitmix64(master ^ C1) ^ splitmix64(stream + C2) ^ splitmix64(trial + C3))
// so every (master, stream, trial) triple gets its own source regardless of
// how trials are scheduled across threads.
Rng trial_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t trial);

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0,1].
inline double uniform01_open_low(Rng& rng) {
    return 1.0 - uniform01(rng);
}

}  // namespace permspec
