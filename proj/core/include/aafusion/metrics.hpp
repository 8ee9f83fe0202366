#pragma once

#include "aafusion/gaussian.hpp"

#include <cstddef>
#include <span>

namespace aafusion {

struct OspaParams {
    double cutoff = 100.0; ///< c, in metres
    double order = 2.0;    ///< p
};

/// OSPA distance between two finite point sets. Both empty gives 0; exactly
/// one empty gives the cutoff. Throws std::invalid_argument for c <= 0 or p < 1.
double ospa(std::span<const Vector> x, std::span<const Vector> y, const OspaParams& params = {});

/// Average communication cost: total real values broadcast divided by
/// runs * steps * sensors. Zero when any count is zero.
double acc(double total_cost, std::size_t runs, std::size_t steps, std::size_t sensors);

} // namespace aafusion
