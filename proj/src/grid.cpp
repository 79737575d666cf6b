#include <cmath>

#include <spdlog/spdlog.h>

#include "fftw_util.hpp"
#include "grid_detail.hpp"
#include "hsewald/fourier.hpp"
#include "hsewald/parallel.hpp"
#include "hsewald/simd.hpp"

namespace hse {

namespace detail {

std::mutex &fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void fftw_use_threads(int n) {
    static const bool init = fftw_init_threads() != 0;
    if (init)
        fftw_plan_with_nthreads(std::max(1, n));
}

Stencil make_stencil(const Vec3 &x, const GridSpec &g) {
    Stencil s;
    s.P = g.P;
    const double a = g.window_exponent();
    for (int d = 0; d < 3; ++d) {
        const double t = (x[d] - g.origin[d]) / g.h;
        const int start = static_cast<int>(std::floor(t - 0.5 * g.P)) + 1;
        if (!std::isfinite(t) || start < 0 || start + g.P > g.dims[d])
            throw DomainError("point outside the spreading grid");
        s.start[d] = start;
        double *w = d == 0 ? s.wx.data() : d == 1 ? s.wy.data() : s.wz.data();
        for (int p = 0; p < g.P; ++p) {
            const double dist = g.origin[d] + (start + p) * g.h - x[d];
            w[p] = std::exp(-a * dist * dist);
        }
    }
    return s;
}

double gather_stencil(const Stencil &s, const double *data, const std::array<int, 3> &dims, DotFn dotp) {
    double acc = 0.0;
    for (int i = 0; i < s.P; ++i) {
        double row_acc = 0.0;
        for (int j = 0; j < s.P; ++j) {
            const std::size_t row =
                (std::size_t(s.start[0] + i) * dims[1] + (s.start[1] + j)) * dims[2] + s.start[2];
            row_acc += s.wy[j] * dotp(data + row, s.wz.data(), s.P);
        }
        acc += s.wx[i] * row_acc;
    }
    return acc;
}

} // namespace detail

GridSpec GridSpec::make(Geometry geometry, double L, int M, int P, double xi) {
    if (!(L > 0.0) || !std::isfinite(L))
        throw ParameterError("box length must be positive");
    if (M < 1)
        throw ParameterError("grid size M must be positive");
    if (P < 2 || P > detail::max_support)
        throw ParameterError(fmt::format("support width P must lie in [2, {}]", detail::max_support));
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw ParameterError("Ewald parameter xi must be positive");
    if ((M + P) % 2 != 0) {
        spdlog::info("M + P = {} is odd; using M = {}", M + P, M + 1);
        ++M;
    }
    GridSpec g;
    g.geometry = geometry;
    g.L = L;
    g.xi = xi;
    g.M = M;
    g.P = P;
    g.h = L / M;
    g.Mt = M + P;
    g.Lt = L + P * g.h;
    g.eta = P * xi * xi * g.h * g.h / (window_shape_c * window_shape_c * pi);
    g.kinf = pi * g.Mt / g.Lt;
    const double half_p = 0.5 * P * g.h;
    if (geometry == Geometry::half_space) {
        g.dims = {g.Mt, g.Mt, 2 * g.Mt};
        g.origin = {-half_p, -half_p, -g.Lt};
    } else {
        g.dims = {g.Mt, g.Mt, g.Mt};
        g.origin = {-half_p, -half_p, -half_p};
    }
    return g;
}

double GridSpec::truncation_radius() const {
    return (geometry == Geometry::half_space ? std::sqrt(6.0) : std::sqrt(3.0)) * Lt;
}

double GridSpec::window_scale() const { return std::pow(2.0 * xi * xi / (pi * eta), 1.5); }

double GridSpec::window_exponent() const { return 2.0 * xi * xi / eta; }

std::vector<Grid3> spread(const std::vector<Vec3> &positions, const std::vector<double> &weights, int ncomp,
                          const GridSpec &grid) {
    if (ncomp < 1 || weights.size() != positions.size() * std::size_t(ncomp))
        throw ParameterError("spread: weight count does not match entries");
    if (grid.P > grid.dims[0] || grid.P > grid.dims[1] || grid.P > grid.dims[2])
        throw ParameterError("spread: support exceeds the grid");
    std::vector<Grid3> out(ncomp, Grid3(grid.dims));
    const std::size_t n = positions.size();
    if (n == 0)
        return out;

    // Validate every support up front; stencils are rebuilt while spreading.
    std::vector<int> xstart(n);
    for (std::size_t m = 0; m < n; ++m)
        xstart[m] = detail::make_stencil(positions[m], grid).start[0];

    // Slabs along x at least P wide: same-colour slabs never touch the same
    // grid planes, and the colour order fixes the summation order.
    const int width = grid.P;
    const int nslab = (grid.dims[0] + width - 1) / width;
    std::vector<std::vector<std::size_t>> slab(nslab);
    for (std::size_t m = 0; m < n; ++m)
        slab[xstart[m] / width].push_back(m);

    const double scale = grid.window_scale();
    const auto axpy = active_axpy();
    const auto &dims = grid.dims;
    auto run_slab = [&](int s) {
        for (std::size_t m : slab[s]) {
            const auto S = detail::make_stencil(positions[m], grid);
            const double *w = weights.data() + m * ncomp;
            for (int i = 0; i < S.P; ++i)
                for (int j = 0; j < S.P; ++j) {
                    const double wij = scale * S.wx[i] * S.wy[j];
                    const std::size_t row =
                        (std::size_t(S.start[0] + i) * dims[1] + (S.start[1] + j)) * dims[2] + S.start[2];
                    for (int c = 0; c < ncomp; ++c)
                        if (w[c] != 0.0)
                            axpy(out[c].data.data() + row, S.wz.data(), wij * w[c], S.P);
                }
        }
    };
    for (int colour = 0; colour < 2; ++colour) {
        std::vector<int> ids;
        for (int s = colour; s < nslab; s += 2)
            ids.push_back(s);
        parallel_for(ids.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                run_slab(ids[i]);
        });
    }
    return out;
}

double gather(const Grid3 &T, const Vec3 &x, const GridSpec &grid) {
    if (T.dims != grid.dims)
        throw ConfigurationError("gather: grid dimensions do not match");
    const auto s = detail::make_stencil(x, grid);
    const double h3 = grid.h * grid.h * grid.h;
    return h3 * grid.window_scale() * detail::gather_stencil(s, T.data.data(), T.dims, active_dot());
}

} // namespace hse
