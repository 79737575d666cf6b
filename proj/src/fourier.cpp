#include <chrono>
#include <cmath>
#include <cstring>

#include <spdlog/spdlog.h>

#include "fftw_util.hpp"
#include "grid_detail.hpp"
#include "hsewald/fourier.hpp"
#include "hsewald/kernels.hpp"
#include "hsewald/parallel.hpp"
#include "hsewald/simd.hpp"

namespace hse {

using detail::Complex;
using detail::FftwArray;
using detail::Plan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Wavenumbers along one padded axis; the Nyquist entry is set to zero so odd
/// symbols stay real-consistent.
std::vector<double> wavenumbers(int n, double h, int count) {
    std::vector<double> k(count);
    const double dk = 2.0 * pi / (n * h);
    for (int i = 0; i < count; ++i) {
        const int s = i <= n / 2 ? i : i - n;
        k[i] = (2 * i == n) ? 0.0 : s * dk;
    }
    return k;
}

inline int fold(int i, int n) { return std::min(i, n - i); }

// Padding helper: copies an unpadded grid into the low corner of a zeroed
// padded array and reads the same block back out.
void pad_into(const Grid3 &g, double *padded, const std::array<int, 3> &pd) {
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            std::memcpy(padded + (std::size_t(i) * pd[1] + j) * pd[2],
                        g.data.data() + (std::size_t(i) * g.dims[1] + j) * g.dims[2], sizeof(double) * g.dims[2]);
}

void truncate_from(const double *padded, const std::array<int, 3> &pd, Grid3 &g) {
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            std::memcpy(g.data.data() + (std::size_t(i) * g.dims[1] + j) * g.dims[2],
                        padded + (std::size_t(i) * pd[1] + j) * pd[2], sizeof(double) * g.dims[2]);
}

unsigned plan_flags(bool measure) { return measure ? FFTW_MEASURE : FFTW_ESTIMATE; }

} // namespace

// ---- symbols ---------------------------------------------------------------

Mat3 stokeslet_symbol(const Vec3 &k, double xi) {
    const double k2 = dot(k, k);
    const double f = -(1.0 + k2 / (4.0 * xi * xi));
    Mat3 m{};
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
            m[j][l] = f * ((j == l ? k2 : 0.0) - k[j] * k[l]);
    return m;
}

Vec3 stresslet_symbol_apply(const Vec3 &k, double xi, const Mat3 &C) {
    const double k2 = dot(k, k);
    const double f = -(1.0 + k2 / (4.0 * xi * xi));
    const Vec3 Ck = matvec(C, k);
    const Vec3 CTk{C[0][0] * k[0] + C[1][0] * k[1] + C[2][0] * k[2], C[0][1] * k[0] + C[1][1] * k[1] + C[2][1] * k[2],
                   C[0][2] * k[0] + C[1][2] * k[1] + C[2][2] * k[2]};
    const double tr = C[0][0] + C[1][1] + C[2][2];
    const double kCk = dot(k, Ck);
    Vec3 u{};
    for (int j = 0; j < 3; ++j)
        u[j] = f * (k2 * (Ck[j] + CTk[j] + k[j] * tr) - 2.0 * k[j] * kCk);
    return u;
}

Vec3 rotlet_symbol_apply(const Vec3 &k, const Vec3 &v) { return 2.0 * cross(k, v); }

std::pair<int, int> fft_counts(KernelKind kind, Geometry geometry) {
    const bool half = geometry == Geometry::half_space;
    switch (kind) {
    case KernelKind::stokeslet:
        return half ? std::pair{7, 6} : std::pair{3, 3};
    case KernelKind::stresslet:
        return half ? std::pair{21, 6} : std::pair{9, 3};
    case KernelKind::rotlet:
        return half ? std::pair{6, 6} : std::pair{3, 3};
    }
    return {0, 0};
}

// ---- plain convolution -----------------------------------------------------

Grid3 convolve(const GreensTable &table, const GridSpec &grid, const Grid3 &rho) {
    if (rho.dims != grid.dims || table.Mt != grid.Mt || table.geometry != grid.geometry)
        throw ConfigurationError("convolve: grid and table do not match");
    const auto pd = grid.padded();
    const int nkz = pd[2] / 2 + 1;
    const std::size_t nk = std::size_t(pd[0]) * pd[1] * nkz;
    FftwArray<double> in(grid.padded_size()), out(grid.padded_size());
    FftwArray<Complex> spec(nk);
    Plan fwd, bwd;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        detail::fftw_use_threads(num_threads());
        fwd = Plan(fftw_plan_dft_r2c_3d(pd[0], pd[1], pd[2], in.data(), detail::as_fftw(spec.data()), FFTW_ESTIMATE));
        bwd = Plan(fftw_plan_dft_c2r_3d(pd[0], pd[1], pd[2], detail::as_fftw(spec.data()), out.data(), FFTW_ESTIMATE));
    }
    std::fill(in.data(), in.data() + in.size(), 0.0);
    pad_into(rho, in.data(), pd);
    fwd.execute();
    const double inv_n = 1.0 / double(grid.padded_size());
    for (int i = 0; i < pd[0]; ++i)
        for (int j = 0; j < pd[1]; ++j)
            for (int k = 0; k < nkz; ++k)
                spec[(std::size_t(i) * pd[1] + j) * nkz + k] *= inv_n * table.at(fold(i, pd[0]), fold(j, pd[1]), k);
    bwd.execute();
    Grid3 res(grid.dims);
    truncate_from(out.data(), pd, res);
    return res;
}

// ---- solver ----------------------------------------------------------------

struct FourierSolver::Impl {
    KernelKind kind;
    GridSpec g;
    FourierOptions opts;
    bool half;
    std::array<int, 3> pd;
    int nkz;
    std::size_t nk;
    std::vector<double> kx, ky, kz;
    std::vector<double> kern_mult; // E(k) times the kernel's table (and 1 + k^2/4xi^2 for S, T)
    std::vector<double> phi_mult;  // E(k) times the harmonic table
    FftwArray<double> pad_in, real_out;
    FftwArray<Complex> spec, scratch;
    std::array<FftwArray<Complex>, 3> acc;
    FftwArray<Complex> phi;
    Plan fwd, bwd;
    FourierStats stats;

    Impl(KernelKind k, const GridSpec &grid, const FourierOptions &o);

    void forward(const Grid3 &g);
    void backward(Grid3 &out);
    template <class F>
    void for_each_k(F &&f);
    void accumulate_kernel(int channel);
    void accumulate_correction(int channel);
};

FourierSolver::Impl::Impl(KernelKind k, const GridSpec &grid, const FourierOptions &o)
    : kind(k), g(grid), opts(o), half(grid.geometry == Geometry::half_space), pd(grid.padded()) {
    nkz = pd[2] / 2 + 1;
    nk = std::size_t(pd[0]) * pd[1] * nkz;
    kx = wavenumbers(pd[0], g.h, pd[0]);
    ky = wavenumbers(pd[1], g.h, pd[1]);
    kz = wavenumbers(pd[2], g.h, nkz);

    // rough footprint of the work arrays
    const double bytes = 8.0 * 2 * g.padded_size() + 16.0 * nk * (2 + 3 + (half ? 1 : 0)) + 8.0 * nk * 2;
    if (bytes > double(opts.memory_budget))
        throw ResourceError(fmt::format("Fourier work arrays need {:.0f} MiB, budget is {:.0f} MiB",
                                        bytes / (1 << 20), double(opts.memory_budget) / (1 << 20)));

    const auto t0 = Clock::now();
    const GreensKind kernel_greens = kind == KernelKind::rotlet ? GreensKind::harmonic : GreensKind::biharmonic;
    const GreensTable kt = cached_greens(kernel_greens, g, opts.cache_dir, opts.memory_budget);
    GreensTable ht;
    if (half)
        ht = kernel_greens == GreensKind::harmonic ? kt
                                                   : cached_greens(GreensKind::harmonic, g, opts.cache_dir,
                                                                   opts.memory_budget);
    const double inv4xi2 = 1.0 / (4.0 * g.xi * g.xi);
    const double decay = (1.0 - g.eta) * inv4xi2;
    kern_mult.resize(nk);
    if (half)
        phi_mult.resize(nk);
    for (int i = 0; i < pd[0]; ++i)
        for (int j = 0; j < pd[1]; ++j)
            for (int l = 0; l < nkz; ++l) {
                // |k| from the true (unzeroed) wavenumbers for the Gaussian factor
                const double ax = 2.0 * pi * fold(i, pd[0]) / (pd[0] * g.h);
                const double ay = 2.0 * pi * fold(j, pd[1]) / (pd[1] * g.h);
                const double az = 2.0 * pi * l / (pd[2] * g.h);
                const double k2 = ax * ax + ay * ay + az * az;
                const double E = std::exp(-decay * k2);
                const std::size_t idx = (std::size_t(i) * pd[1] + j) * nkz + l;
                const int fi = fold(i, pd[0]), fj = fold(j, pd[1]);
                double m = E * kt.at(fi, fj, l);
                if (kind != KernelKind::rotlet)
                    m *= 1.0 + k2 * inv4xi2;
                kern_mult[idx] = m;
                if (half)
                    phi_mult[idx] = E * ht.at(fi, fj, l);
            }
    stats.times.precompute = seconds_since(t0);

    pad_in = FftwArray<double>(g.padded_size());
    real_out = FftwArray<double>(g.padded_size());
    spec = FftwArray<Complex>(nk);
    scratch = FftwArray<Complex>(nk);
    for (auto &a : acc)
        a = FftwArray<Complex>(nk);
    if (half)
        phi = FftwArray<Complex>(nk);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        detail::fftw_use_threads(num_threads());
        const unsigned flags = plan_flags(opts.measure_plans);
        fwd = Plan(
            fftw_plan_dft_r2c_3d(pd[0], pd[1], pd[2], pad_in.data(), detail::as_fftw(spec.data()), flags));
        bwd = Plan(
            fftw_plan_dft_c2r_3d(pd[0], pd[1], pd[2], detail::as_fftw(scratch.data()), real_out.data(), flags));
    }
    if (!fwd || !bwd)
        throw ResourceError("FFTW failed to create plans");
    std::fill(pad_in.data(), pad_in.data() + pad_in.size(), 0.0);
}

void FourierSolver::Impl::forward(const Grid3 &grid) {
    const auto t0 = Clock::now();
    pad_into(grid, pad_in.data(), pd);
    fwd.execute();
    ++stats.ffts;
    stats.times.fft += seconds_since(t0);
}

void FourierSolver::Impl::backward(Grid3 &out) {
    const auto t0 = Clock::now();
    bwd.execute();
    truncate_from(real_out.data(), pd, out);
    ++stats.iffts;
    stats.times.ifft += seconds_since(t0);
}

template <class F>
void FourierSolver::Impl::for_each_k(F &&f) {
    parallel_for(std::size_t(pd[0]), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (int j = 0; j < pd[1]; ++j) {
                const std::size_t row = (i * pd[1] + j) * nkz;
                for (int l = 0; l < nkz; ++l)
                    f(row + l, Vec3{kx[i], ky[j], kz[l]});
            }
    });
}

void FourierSolver::Impl::accumulate_kernel(int c) {
    const auto t0 = Clock::now();
    const Complex I(0.0, 1.0);
    Complex *a0 = acc[0].data(), *a1 = acc[1].data(), *a2 = acc[2].data();
    const Complex *C = spec.data();
    const double *mult = kern_mult.data();
    switch (kind) {
    case KernelKind::stokeslet:
        for_each_k([&](std::size_t idx, const Vec3 &k) {
            const double k2 = dot(k, k);
            const Complex v = -mult[idx] * C[idx];
            a0[idx] += ((c == 0 ? k2 : 0.0) - k[0] * k[c]) * v;
            a1[idx] += ((c == 1 ? k2 : 0.0) - k[1] * k[c]) * v;
            a2[idx] += ((c == 2 ? k2 : 0.0) - k[2] * k[c]) * v;
        });
        break;
    case KernelKind::stresslet: {
        const int l = c / 3, m = c % 3;
        for_each_k([&](std::size_t idx, const Vec3 &k) {
            const double k2 = dot(k, k);
            const Complex v = -I * mult[idx] * C[idx];
            const double klm = 2.0 * k[l] * k[m];
            Vec3 s{};
            for (int j = 0; j < 3; ++j)
                s[j] = ((j == l ? k[m] : 0.0) + (l == m ? k[j] : 0.0) + (m == j ? k[l] : 0.0)) * k2 - klm * k[j];
            a0[idx] += s[0] * v;
            a1[idx] += s[1] * v;
            a2[idx] += s[2] * v;
        });
        break;
    }
    case KernelKind::rotlet:
        for_each_k([&](std::size_t idx, const Vec3 &k) {
            Vec3 e{};
            e[c] = 1.0;
            const Vec3 s = rotlet_symbol_apply(k, e);
            const Complex v = I * mult[idx] * C[idx];
            a0[idx] += s[0] * v;
            a1[idx] += s[1] * v;
            a2[idx] += s[2] * v;
        });
        break;
    }
    stats.times.scale += seconds_since(t0);
}

// Correction channels: 0 charge, 1..3 dipole, 4..12 quadrupole.
void FourierSolver::Impl::accumulate_correction(int ch) {
    const auto t0 = Clock::now();
    Complex *p = phi.data();
    const Complex *C = spec.data();
    const double *mult = phi_mult.data();
    if (ch == 0) {
        for_each_k([&](std::size_t idx, const Vec3 &) { p[idx] += mult[idx] * C[idx]; });
    } else if (ch <= 3) {
        const int d = ch - 1;
        for_each_k([&](std::size_t idx, const Vec3 &k) { p[idx] += Complex(0.0, k[d] * mult[idx]) * C[idx]; });
    } else {
        const int a = (ch - 4) / 3, b = (ch - 4) % 3;
        for_each_k([&](std::size_t idx, const Vec3 &k) { p[idx] -= (k[a] * k[b] * mult[idx]) * C[idx]; });
    }
    stats.times.scale += seconds_since(t0);
}

FourierSolver::FourierSolver(KernelKind kind, const GridSpec &grid, const FourierOptions &options)
    : impl_(std::make_unique<Impl>(kind, grid, options)) {}

FourierSolver::~FourierSolver() = default;

const GridSpec &FourierSolver::grid() const { return impl_->g; }
const FourierStats &FourierSolver::stats() const { return impl_->stats; }
void FourierSolver::reset_stats() {
    const double pre = impl_->stats.times.precompute;
    impl_->stats = {};
    impl_->stats.times.precompute = pre;
}

VelocityResult FourierSolver::evaluate(const PointSystem &system, const Targets &targets) {
    Impl &s = *impl_;
    const GridSpec &g = s.g;
    if (system.kind != s.kind)
        throw ConfigurationError("Fourier solver was built for a different kernel");
    if (system.geometry != g.geometry)
        throw ConfigurationError("Fourier solver was built for a different geometry");
    if (std::abs(system.box_length - g.L) > 1e-12 * g.L)
        throw ConfigurationError("system box length does not match the grid");
    if (s.half)
        for (const auto &x : targets.points)
            if (x[2] < 0.0)
                throw DomainError("half-space target below the wall");

    // gridding
    auto t0 = Clock::now();
    const ImageSystem img = s.half ? reflect(system) : as_combined(system);
    const std::size_t nc = img.combined_positions.size();
    const int kc = s.kind == KernelKind::stresslet ? 9 : 3;
    std::vector<double> kw(nc * kc);
    for (std::size_t m = 0; m < nc; ++m) {
        const Vec3 &a = img.combined_strength[m];
        double *w = kw.data() + m * kc;
        if (s.kind == KernelKind::stokeslet) {
            std::copy(a.begin(), a.end(), w);
        } else if (s.kind == KernelKind::rotlet) {
            const Vec3 v = cross(a, img.combined_orientation[m]);
            std::copy(v.begin(), v.end(), w);
        } else {
            const Vec3 &q = img.combined_orientation[m];
            for (int l = 0; l < 3; ++l)
                for (int mm = 0; mm < 3; ++mm)
                    w[3 * l + mm] = a[l] * q[mm];
        }
    }
    const std::vector<Grid3> kernel_grids = spread(img.combined_positions, kw, kc, g);

    // correction channels (index into the 13 generic ones)
    std::vector<int> channels;
    std::vector<Grid3> corr_grids;
    if (s.half) {
        switch (s.kind) {
        case KernelKind::stokeslet:
            channels = {0, 1, 2, 3};
            break;
        case KernelKind::stresslet:
            channels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
            break;
        case KernelKind::rotlet:
            channels = {1, 2, 3};
            break;
        }
        const std::size_t n = system.size();
        const int cc = static_cast<int>(channels.size());
        std::vector<double> cw(n * cc);
        for (std::size_t m = 0; m < n; ++m) {
            const CorrectionWeights w = correction_weights(s.kind, system.positions[m], system.strength[m],
                                                           system.has_orientation() ? system.orientation[m] : Vec3{});
            for (int c = 0; c < cc; ++c) {
                const int ch = channels[c];
                double v;
                if (ch == 0)
                    v = w.charge;
                else if (ch <= 3)
                    v = w.dipole[ch - 1];
                else
                    v = w.quad[(ch - 4) / 3][(ch - 4) % 3];
                cw[m * cc + c] = v;
            }
        }
        corr_grids = spread(img.image_positions, cw, cc, g);
    }
    s.stats.times.gridding += seconds_since(t0);

    // transforms and scaling
    for (auto &a : s.acc)
        std::fill(a.data(), a.data() + s.nk, Complex{});
    if (s.half)
        std::fill(s.phi.data(), s.phi.data() + s.nk, Complex{});
    for (int c = 0; c < kc; ++c) {
        s.forward(kernel_grids[c]);
        s.accumulate_kernel(c);
    }
    for (std::size_t c = 0; c < corr_grids.size(); ++c) {
        s.forward(corr_grids[c]);
        s.accumulate_correction(channels[c]);
    }

    // back to real space: T1 = kernel + e3 phi, T2 = grad phi
    std::vector<Grid3> T1(3, Grid3(g.dims)), T2;
    for (int j = 0; j < 3; ++j) {
        t0 = Clock::now();
        Complex *dst = s.scratch.data();
        const Complex *src = s.acc[j].data();
        if (s.half && j == 2) {
            const Complex *p = s.phi.data();
            for (std::size_t i = 0; i < s.nk; ++i)
                dst[i] = src[i] + p[i];
        } else {
            std::copy(src, src + s.nk, dst);
        }
        s.stats.times.scale += seconds_since(t0);
        s.backward(T1[j]);
    }
    if (s.half) {
        T2.assign(3, Grid3(g.dims));
        for (int d = 0; d < 3; ++d) {
            t0 = Clock::now();
            Complex *dst = s.scratch.data();
            const Complex *p = s.phi.data();
            s.for_each_k([&](std::size_t idx, const Vec3 &k) { dst[idx] = Complex(0.0, k[d]) * p[idx]; });
            s.stats.times.scale += seconds_since(t0);
            s.backward(T2[d]);
        }
    }

    // gather
    t0 = Clock::now();
    VelocityResult res;
    res.velocity.assign(targets.size(), Vec3{});
    const double factor = kernel_prefactor(s.kind) * g.h * g.h * g.h * g.window_scale() / double(g.padded_size());
    const auto dotp = active_dot();
    parallel_for(targets.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            const Vec3 &x = targets.points[t];
            const auto st = detail::make_stencil(x, g);
            Vec3 u{};
            for (int j = 0; j < 3; ++j)
                u[j] = detail::gather_stencil(st, T1[j].data.data(), g.dims, dotp);
            if (s.half && x[2] != 0.0)
                for (int d = 0; d < 3; ++d)
                    u[d] -= x[2] * detail::gather_stencil(st, T2[d].data.data(), g.dims, dotp);
            res.velocity[t] = factor * u;
        }
    });
    res.fourier = res.velocity;
    s.stats.times.gather += seconds_since(t0);
    return res;
}

VelocityResult fourier_space_sum(const PointSystem &system, const GridSpec &grid, const Targets &targets,
                                 const FourierOptions &options, FourierStats *stats) {
    FourierSolver solver(system.kind, grid, options);
    VelocityResult r = solver.evaluate(system, targets);
    if (stats)
        *stats = solver.stats();
    return r;
}

} // namespace hse
