#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsewald/estimates.hpp"
#include "hsewald/ewald.hpp"

namespace hse::bench {

// Experiment drivers for error sweeps, direct-cost ratios, break-even and
// runtime breakdowns. Every driver returns flat records that serialize to
// CSV rows and a JSON manifest.

/// CPU model and library thread count, embedded in every record.
std::string environment_note();

struct BenchRecord {
    std::string experiment;
    KernelKind kernel = KernelKind::stokeslet;
    Geometry geometry = Geometry::free_space;
    std::size_t N = 0;
    double L = 0.0;
    double xi = 0.0;
    double rc = 0.0;
    int M = 0;
    int P = 0;
    /// Wall seconds per phase: gridding, fft, scale, ifft, gather, real,
    /// total, precompute. Precompute is never part of total.
    std::map<std::string, double> timings;
    std::map<std::string, double> metrics;
    int repetitions = 1;
    std::string environment;

    bool operator==(const BenchRecord &) const = default;
};

/// Throws UsageError when total falls short of the summed sub-phases by more
/// than `slack` seconds, or a timed record has fewer than 3 repetitions.
void check_record(const BenchRecord &record, double slack = 1e-3);

std::string to_csv(const std::vector<BenchRecord> &records);
std::vector<BenchRecord> from_csv(const std::string &text);
std::string to_json(const std::vector<BenchRecord> &records);
std::vector<BenchRecord> from_json(const std::string &text);

/// Writes <stem>.csv and <stem>.json.
void write_records(const std::vector<BenchRecord> &records, const std::filesystem::path &stem);

// ---- statistics ------------------------------------------------------------

double median(std::vector<double> v);

/// Least-squares slope and intercept of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y);

/// Slope of log(y) against log(x).
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

/// Standard deviation over mean.
double coefficient_of_variation(const std::vector<double> &v);

// ---- error sweeps ----------------------------------------------------------

struct FourierSweep {
    KernelKind kind = KernelKind::stokeslet;
    std::vector<Geometry> geometries{Geometry::free_space, Geometry::half_space};
    std::size_t N = 10000;
    double L = 3.0;
    double xi = 3.49;
    std::vector<int> M_values;
    std::uint64_t seed = 1;
    /// Oracle targets, evenly strided over the sources.
    std::size_t max_targets = 1000;
    /// Leakage target passed to extension_support for each M.
    double support_tolerance = 1e-14;
    /// Keeps the window error below the truncation error being measured.
    int min_P = 32;
};

/// Per (geometry, M): metrics error_abs and error_rel of the Fourier part
/// against direct minus a converged real part, the estimate (absolute and
/// relative to the reference RMS) and kinf.
std::vector<BenchRecord> sweep_fourier_error(const FourierSweep &config);

struct RealSweep {
    KernelKind kind = KernelKind::stokeslet;
    std::vector<Geometry> geometries{Geometry::free_space, Geometry::half_space};
    std::size_t N = 2000;
    double L = 3.0;
    double xi = 4.67;
    std::vector<double> rc_values;
    std::uint64_t seed = 1;
    std::size_t max_targets = 2000;
};

/// Per (geometry, r_c): the real part against one with xi r_c = 9, plus the
/// estimate. Same metric names as the Fourier sweep.
std::vector<BenchRecord> sweep_real_error(const RealSweep &config);

// ---- timing ----------------------------------------------------------------

/// Median wall time of `reps` direct sums over all sources.
double time_direct(const PointSystem &system, int reps);

/// One record per (kind, N): time_free, time_half and ratio = half / free.
std::vector<BenchRecord> direct_cost_ratio(const std::vector<KernelKind> &kinds,
                                           const std::vector<std::size_t> &N_values, int reps,
                                           std::uint64_t seed, double L = 1.0);

struct TimingRun {
    std::vector<std::size_t> N_values;
    double density = 2500.0;
    /// Relative tolerance handed to select_parameters; halved until the gate passes.
    double tolerance = 0.25e-8;
    double gate = 0.5e-8;
    std::size_t direct_targets = 200;
    int reps = 3;
    std::uint64_t seed = 1;
    std::filesystem::path cache_dir;
};

/// Paper-scale xi per kernel: 6, 5.8 and 7.
double default_xi(KernelKind kind);

/// Per N at constant density: parameters from select_parameters, the gate
/// error, warm Ewald phase timings (median of reps, precompute separate) and
/// the extrapolated direct time from a strided target subsample. Throws
/// InfeasibleError when the gate cannot be met.
std::vector<BenchRecord> runtime_breakdown(KernelKind kind, Geometry geometry, const TimingRun &run,
                                           std::optional<double> xi = {});

struct BreakEven {
    /// Interpolated crossover; the first N when Ewald already wins there.
    double N_star = 0.0;
    /// False when Ewald never wins in the range (N_star is then infinite) or
    /// already wins at the smallest N.
    bool bracketed = false;
    std::vector<BenchRecord> records;
};

/// Crossover of ewald total and direct time on log-log axes.
BreakEven break_even(const std::vector<BenchRecord> &timings);
BreakEven break_even(KernelKind kind, Geometry geometry, const TimingRun &run, std::optional<double> xi = {});

/// Precompute time against `solves` warm evaluations with one table.
BenchRecord amortization(KernelKind kind, Geometry geometry, std::size_t N, int solves, std::uint64_t seed,
                         double density = 2500.0);

} // namespace hse::bench
