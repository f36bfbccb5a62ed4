#include "permspec/rng.hpp"

namespace permspec {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t trial) {
    std::uint64_t s = splitmix64(master_seed ^ 0x243f6a8885a308d3ULL);
    s ^= splitmix64(stream + 0x13198a2e03707344ULL);
    s ^= splitmix64(trial + 0xa4093822299f31d0ULL);
    return Rng(splitmix64(s));
}

}  // namespace permspec
