#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "hsewald/system.hpp"
#include "hsewald/types.hpp"

namespace hse {

// Spectral Ewald evaluation of the long-range part: Gaussian spreading onto a
// uniform grid, zero-padded FFT, multiplication by the truncated Green's
// function and the kernel symbol, inverse FFT and Gaussian gather.

inline constexpr double window_shape_c = 0.95;
inline constexpr int max_support_width = 64;

struct GridSpec {
    Geometry geometry = Geometry::free_space;
    double L = 1.0;   // physical box edge
    double xi = 1.0;  // Ewald parameter
    int M = 0;        // base points per L
    int P = 0;        // Gaussian support in points per dimension
    double h = 0.0;   // spacing L / M
    int Mt = 0;       // M + P
    double Lt = 0.0;  // L + P h
    double eta = 0.0; // window shape
    double kinf = 0.0;
    Vec3 origin{};              // coordinate of grid index (0, 0, 0)
    std::array<int, 3> dims{};  // Mt x Mt x Mt, or Mt x Mt x 2 Mt in half space

    /// Builds the grid; an odd Mt bumps M by one (logged).
    static GridSpec make(Geometry geometry, double L, int M, int P, double xi);

    std::array<int, 3> padded() const { return {2 * dims[0], 2 * dims[1], 2 * dims[2]}; }
    std::size_t size() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
    std::size_t padded_size() const { return 8 * size(); }
    /// Truncation radius of the Green's functions.
    double truncation_radius() const;
    /// Peak value (2 xi^2 / (pi eta))^{3/2} and exponent factor 2 xi^2 / eta of the window.
    double window_scale() const;
    double window_exponent() const;
};

struct Grid3 {
    std::array<int, 3> dims{};
    std::vector<double> data;

    Grid3() = default;
    explicit Grid3(std::array<int, 3> d) : dims(d), data(std::size_t(d[0]) * d[1] * d[2], 0.0) {}
    double &at(int i, int j, int k) { return data[(std::size_t(i) * dims[1] + j) * dims[2] + k]; }
    double at(int i, int j, int k) const { return data[(std::size_t(i) * dims[1] + j) * dims[2] + k]; }
};

// ---- truncated Green's functions -------------------------------------------

enum class GreensKind : std::uint8_t { harmonic = 0, biharmonic = 1 };

std::string to_string(GreensKind kind);

/// Fourier transform of 1/r (harmonic) or r (biharmonic) cut off at radius R.
double truncated_greens_hat(GreensKind kind, double R, double k);

/// Smallest even n with n >= s_min * Mt.
int oversampled_size(int Mt, double s_min);
/// 1 + sqrt(6) in half space, 1 + sqrt(3) in free space.
double oversampling_minimum(Geometry geometry);

// Discrete transform of the truncated kernel on the zero-padded grid. Since
// the kernel is even in every coordinate only one octant is stored; a padded
// index i maps to min(i, n - i).
struct GreensTable {
    GreensKind kind = GreensKind::harmonic;
    Geometry geometry = Geometry::free_space;
    int Mt = 0;
    double Lt = 0.0;
    double R = 0.0;
    int oversampled = 0; // s_f * Mt along x and y
    std::array<int, 3> dims{};
    std::vector<double> samples;

    double at(int i, int j, int k) const { return samples[(std::size_t(i) * dims[1] + j) * dims[2] + k]; }
    bool matches(GreensKind k, const GridSpec &grid) const;
};

inline constexpr std::size_t default_memory_budget = std::size_t(3) << 30;

GreensTable precompute_greens(GreensKind kind, const GridSpec &grid,
                              std::size_t memory_budget = default_memory_budget);

void save_greens(const GreensTable &table, const std::filesystem::path &path);
GreensTable load_greens(const std::filesystem::path &path);
std::filesystem::path greens_cache_path(const std::filesystem::path &dir, GreensKind kind, const GridSpec &grid);
/// Loads from `dir` when a matching file exists, otherwise computes and
/// stores it there. An empty dir disables caching.
GreensTable cached_greens(GreensKind kind, const GridSpec &grid, const std::filesystem::path &dir,
                          std::size_t memory_budget = default_memory_budget);

// ---- spreading and gathering ----------------------------------------------

/// Spreads `ncomp` weights per entry (weights[m * ncomp + c]) onto ncomp
/// unpadded grids. Deterministic for any thread count.
std::vector<Grid3> spread(const std::vector<Vec3> &positions, const std::vector<double> &weights, int ncomp,
                          const GridSpec &grid);

/// h^3 * sum_j T_j window(x - z_j).
double gather(const Grid3 &T, const Vec3 &x, const GridSpec &grid);

/// h^3 sum_j K(z_i - z_j) rho_j with the tabulated truncated kernel.
Grid3 convolve(const GreensTable &table, const GridSpec &grid, const Grid3 &rho);

// ---- kernel symbols (unnormalized) -----------------------------------------

/// -(k^2 I - k k)(1 + k^2/(4 xi^2))
Mat3 stokeslet_symbol(const Vec3 &k, double xi);
/// A_jlm C_lm for a 3x3 strength C; returns the imaginary part (the symbol is -i times real).
Vec3 stresslet_symbol_apply(const Vec3 &k, double xi, const Mat3 &C);
/// Imaginary part of the rotlet symbol applied to v: u = i (2 k x v).
Vec3 rotlet_symbol_apply(const Vec3 &k, const Vec3 &v);

// ---- full pipeline --------------------------------------------------------

struct FourierOptions {
    bool measure_plans = false;
    std::filesystem::path cache_dir;
    std::size_t memory_budget = default_memory_budget;
};

struct PhaseTimes {
    double precompute = 0.0;
    double gridding = 0.0;
    double fft = 0.0;
    double scale = 0.0;
    double ifft = 0.0;
    double gather = 0.0;

    double evaluation() const { return gridding + fft + scale + ifft + gather; }
};

struct FourierStats {
    int ffts = 0;
    int iffts = 0;
    PhaseTimes times;
};

/// Number of forward and inverse transforms per evaluation.
std::pair<int, int> fft_counts(KernelKind kind, Geometry geometry);

// Reusable evaluator: owns FFT plans, Green's tables and work arrays for one
// (kind, grid) pair.
class FourierSolver {
  public:
    FourierSolver(KernelKind kind, const GridSpec &grid, const FourierOptions &options = {});
    ~FourierSolver();
    FourierSolver(const FourierSolver &) = delete;
    FourierSolver &operator=(const FourierSolver &) = delete;

    /// Fourier part at the targets (also stored in `fourier`).
    VelocityResult evaluate(const PointSystem &system, const Targets &targets);

    const GridSpec &grid() const;
    const FourierStats &stats() const;
    void reset_stats();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

VelocityResult fourier_space_sum(const PointSystem &system, const GridSpec &grid, const Targets &targets,
                                 const FourierOptions &options = {}, FourierStats *stats = nullptr);

} // namespace hse
