#include "loras/rng.hpp"

#include <omp.h>

namespace loras {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t tag2) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= tag * 0xD1B54A32D192ED03ull;
    std::uint64_t b = splitmix64(s);
    s ^= tag2 * 0x8CB92BA72F3D8DD7ull;
    return a ^ splitmix64(s) ^ (b << 1);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    std::uint64_t s = derive_seed(seed, stream, substream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(substream)};
    return Rng(seq);
}

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace loras
