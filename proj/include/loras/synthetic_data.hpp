#pragma once

#include "loras/dataset.hpp"

#include <cstdint>

namespace loras {

/// Two isotropic Gaussian classes with unit standard deviation. The minority
/// class is centred at `shift` on every coordinate, the majority at the origin.
/// Rows are interleaved in a seeded random order.
Dataset two_gaussians(std::size_t n_majority, std::size_t n_minority, std::size_t f_count,
                      double shift, std::uint64_t seed);

}  // namespace loras
