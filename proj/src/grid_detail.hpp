#pragma once

#include <array>

#include "hsewald/fourier.hpp"
#include "hsewald/simd.hpp"

namespace hse::detail {

inline constexpr int max_support = max_support_width;

// Truncated Gaussian window around one point: P weights per dimension and the
// first grid index covered.
struct Stencil {
    int P = 0;
    std::array<int, 3> start{};
    std::array<double, max_support> wx{};
    std::array<double, max_support> wy{};
    std::array<double, max_support> wz{};
};

/// Throws DomainError when the support leaves the grid.
Stencil make_stencil(const Vec3 &x, const GridSpec &grid);

/// sum_ijk wx_i wy_j wz_k data(start + (i, j, k)), without the window scale.
double gather_stencil(const Stencil &s, const double *data, const std::array<int, 3> &dims, DotFn dot);

} // namespace hse::detail
