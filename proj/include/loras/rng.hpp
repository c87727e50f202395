#pragma once

#include <cstdint>
#include <random>

namespace loras {

using Rng = std::mt19937_64;

/// Independent generator for a (seed, stream, substream) triple. Parallel
/// kernels derive one of these per work item, so results never depend on
/// which thread ran the item or in what order.
Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

/// Mixes a seed with a tag; used to derive child seeds (e.g. per fold).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t tag2 = 0);

/// Caps the OpenMP worker count. 0 leaves the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace loras
