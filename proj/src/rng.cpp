#include "smore/rng.hpp"

#include <cmath>
#include <numbers>

namespace smore {

double RngSequence::next_gaussian() {
    // next_unit() is in [0,1); flip to (0,1] so the log is finite.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void shuffle_indices(std::span<std::uint32_t> indices, RngSequence& seq) {
    for (std::size_t i = indices.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(seq.next_below(i));
        std::swap(indices[i - 1], indices[j]);
    }
}

}  // namespace smore
