#include "loras/synthetic_data.hpp"

#include "loras/rng.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace loras {

Dataset two_gaussians(std::size_t n_majority, std::size_t n_minority, std::size_t f_count,
                      double shift, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0x47415553 /* GAUS */);
    const std::size_t n = n_majority + n_minority;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, f_count);
    std::vector<int> y(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t row = order[s];
        const bool minority = s < n_minority;
        y[row] = minority ? 1 : 0;
        for (std::size_t j = 0; j < f_count; ++j) x(row, j) = normal(rng) + (minority ? shift : 0.0);
    }
    return make_dataset(std::move(x), std::move(y));
}

}  // namespace loras
