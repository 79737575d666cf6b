#pragma once

#include "hsewald/system.hpp"

namespace hse {

// O(N * N_t) reference sums. The self term (target t sitting on source
// self_index[t]) is skipped by index, never by a distance test.

VelocityResult direct_sum_free(const PointSystem &system, const Targets &targets);

/// Kernel minus image kernel plus the harmonic wall correction. Targets must
/// satisfy x3 >= 0.
VelocityResult direct_sum_half(const PointSystem &system, const Targets &targets);

/// Dispatches on system.geometry.
VelocityResult direct_sum(const PointSystem &system, const Targets &targets);

} // namespace hse
