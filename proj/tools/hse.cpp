#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "hsewald/bench.hpp"
#include "hsewald/direct.hpp"
#include "hsewald/estimates.hpp"
#include "hsewald/ewald.hpp"
#include "hsewald/parallel.hpp"
#include "hsewald/simd.hpp"

using namespace hse;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_text(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os)
        throw ResourceError("cannot write " + path);
    os << text;
}

std::string velocity_csv(const Targets &targets, const std::vector<Vec3> &u) {
    std::string out = "index,x,y,z,u1,u2,u3\n";
    char line[256];
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Vec3 &x = targets.points[i];
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, x[0], x[1], x[2], u[i][0],
                      u[i][1], u[i][2]);
        out += line;
    }
    return out;
}

std::vector<KernelKind> kinds_from(const std::vector<std::string> &names) {
    std::vector<KernelKind> out;
    for (const auto &n : names)
        out.push_back(parse_kernel(n));
    return out;
}

std::vector<Geometry> geometries_from(const std::vector<std::string> &names) {
    std::vector<Geometry> out;
    for (const auto &n : names)
        out.push_back(parse_geometry(n));
    return out;
}

template <class T>
std::vector<T> arithmetic_range(T first, T last, T step) {
    std::vector<T> out;
    for (T v = first; v <= last + step * T(1e-9); v += step)
        out.push_back(v);
    return out;
}

struct Common {
    int threads = 1;
    std::uint64_t seed = 1;
    int reps = 3;
    std::string out = "bench";
};

void add_common(CLI::App *app, Common &c) {
    app->add_option("--seed", c.seed, "RNG seed for generated systems");
    app->add_option("--reps", c.reps, "timed repetitions")->check(CLI::PositiveNumber);
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output stem; writes <out>.csv and <out>.json");
}

void finish(const std::vector<bench::BenchRecord> &records, const Common &c) {
    bench::write_records(records, c.out);
    spdlog::info("wrote {} records to {}.csv and {}.json", records.size(), c.out, c.out);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Ewald summation of Stokes point singularities, free space and above a no-slip wall"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");
    std::string simd = "auto";
    app.add_option("--simd", simd, "gridding kernels: auto | scalar | avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    // ---- gen ----------------------------------------------------------------
    auto *gen = app.add_subcommand("gen", "write a random system as JSON");
    std::string kernel = "stokeslet", geometry = "free", out;
    std::size_t N = 1000;
    double L = 1.0;
    std::uint64_t seed = 1;
    gen->add_option("--kernel", kernel, "stokeslet | stresslet | rotlet");
    gen->add_option("--geometry", geometry, "free | half");
    gen->add_option("-N,--N", N, "number of sources")->check(CLI::PositiveNumber);
    gen->add_option("-L,--L", L, "box edge")->check(CLI::PositiveNumber);
    gen->add_option("--seed", seed);
    gen->add_option("-o,--out", out, "output file (stdout when omitted)");

    // ---- direct -------------------------------------------------------------
    auto *direct = app.add_subcommand("direct", "O(N^2) direct sum at the sources");
    std::string input, summary;
    int threads = 1;
    direct->add_option("input", input, "system JSON")->required()->check(CLI::ExistingFile);
    direct->add_option("-o,--out", out, "velocity CSV (stdout when omitted)");
    direct->add_option("--summary", summary, "JSON summary file (stderr when omitted)");
    direct->add_option("--threads", threads)->check(CLI::PositiveNumber);

    // ---- ewald --------------------------------------------------------------
    auto *ewald = app.add_subcommand("ewald", "Ewald summation at the sources");
    std::optional<double> rc, tol;
    std::optional<int> M;
    std::optional<std::string> kernel_check, geometry_check;
    double xi = 0.0;
    int P = 16;
    std::string cache_dir;
    bool real_only = false, relative = false;
    ewald->add_option("input", input, "system JSON")->required()->check(CLI::ExistingFile);
    ewald->add_option("--xi", xi, "splitting parameter")->required()->check(CLI::PositiveNumber);
    ewald->add_option("--rc", rc, "real-space cutoff");
    ewald->add_option("--M", M, "grid points per box edge");
    ewald->add_option("--P", P, "Gaussian support in grid points");
    ewald->add_option("--tol", tol, "select rc, M and P for this tolerance instead");
    ewald->add_flag("--relative", relative, "tolerance relative to the velocity RMS");
    ewald->add_option("--kernel", kernel_check, "must match the system file");
    ewald->add_option("--geometry", geometry_check, "must match the system file");
    ewald->add_option("--threads", threads)->check(CLI::PositiveNumber);
    ewald->add_option("--cache-dir", cache_dir, "Green's table cache");
    ewald->add_flag("--real-only", real_only, "emit only the real-space part");
    ewald->add_option("-o,--out", out, "velocity CSV (stdout when omitted)");
    ewald->add_option("--summary", summary, "JSON summary file (stderr when omitted)");

    // ---- precompute ---------------------------------------------------------
    auto *pre = app.add_subcommand("precompute", "build or inspect Green's table caches");
    std::string inspect;
    int grid_M = 32;
    pre->add_option("--kernel", kernel);
    pre->add_option("--geometry", geometry);
    pre->add_option("-L,--L", L)->check(CLI::PositiveNumber);
    pre->add_option("--xi", xi)->check(CLI::PositiveNumber);
    pre->add_option("--M", grid_M)->check(CLI::PositiveNumber);
    pre->add_option("--P", P);
    pre->add_option("--cache-dir", cache_dir);
    pre->add_option("--inspect", inspect, "print the header of a table file")->check(CLI::ExistingFile);

    // ---- params -------------------------------------------------------------
    auto *params = app.add_subcommand("params", "parameters meeting a tolerance, as JSON");
    double eps = 1e-8;
    params->add_option("--kernel", kernel);
    params->add_option("--geometry", geometry);
    params->add_option("--tol", eps, "error tolerance")->check(CLI::PositiveNumber);
    params->add_option("--xi", xi)->required()->check(CLI::PositiveNumber);
    params->add_option("-L,--L", L)->check(CLI::PositiveNumber);
    params->add_option("-N,--N", N)->check(CLI::PositiveNumber);
    params->add_option("--seed", seed);
    params->add_option("--P", P);
    params->add_flag("--relative", relative);

    // ---- bench --------------------------------------------------------------
    auto *bench_cmd = app.add_subcommand("bench", "benchmark experiments");
    bench_cmd->require_subcommand(1);
    Common common;
    std::vector<std::string> kernels{"stokeslet"}, geometries{"free", "half"};

    auto *sf = bench_cmd->add_subcommand("sweep-fourier", "Fourier error against grid size");
    bench::FourierSweep fs;
    std::vector<int> m_range{10, 50, 4};
    sf->add_option("--kernel", kernel);
    sf->add_option("--geometry", geometries)->expected(1, 2);
    sf->add_option("-N,--N", fs.N);
    sf->add_option("-L,--L", fs.L);
    sf->add_option("--xi", fs.xi);
    sf->add_option("--M-range", m_range, "first last step")->expected(3);
    sf->add_option("--targets", fs.max_targets);
    sf->add_option("--min-P", fs.min_P);
    add_common(sf, common);

    auto *sr = bench_cmd->add_subcommand("sweep-real", "real-space error against cutoff");
    bench::RealSweep rs;
    std::vector<double> rc_range{0.05, 1.5, 0.05};
    sr->add_option("--kernel", kernel);
    sr->add_option("--geometry", geometries)->expected(1, 2);
    sr->add_option("-N,--N", rs.N);
    sr->add_option("-L,--L", rs.L);
    sr->add_option("--xi", rs.xi);
    sr->add_option("--rc-range", rc_range, "first last step")->expected(3);
    sr->add_option("--targets", rs.max_targets);
    add_common(sr, common);

    auto *ratio = bench_cmd->add_subcommand("ratio", "half-space over free-space direct cost");
    std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};
    ratio->add_option("--kernel", kernels)->expected(1, 3);
    ratio->add_option("-N,--N", sizes)->expected(1, -1);
    ratio->add_option("-L,--L", L);
    add_common(ratio, common);

    bench::TimingRun run;
    std::optional<double> timing_xi;
    std::vector<std::size_t> timing_sizes{1000, 2000, 5000, 10000, 20000, 50000, 100000};
    auto add_timing = [&](CLI::App *cmd) {
        cmd->add_option("--kernel", kernel);
        cmd->add_option("--geometry", geometries)->expected(1, 2);
        cmd->add_option("-N,--N", timing_sizes)->expected(1, -1);
        cmd->add_option("--xi", timing_xi, "defaults per kernel");
        cmd->add_option("--tol", run.tolerance, "relative tolerance for parameter selection");
        cmd->add_option("--gate", run.gate, "accepted relative error");
        cmd->add_option("--density", run.density);
        cmd->add_option("--direct-targets", run.direct_targets);
        cmd->add_option("--cache-dir", cache_dir);
        add_common(cmd, common);
    };
    auto *be = bench_cmd->add_subcommand("break-even", "crossover N of Ewald and direct");
    add_timing(be);
    auto *bd = bench_cmd->add_subcommand("breakdown", "Ewald phase timings against N");
    add_timing(bd);

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::default_logger()->clone("hse"));
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_pattern("[%l] %v");

    try {
        set_simd_mode(simd == "scalar" ? SimdMode::scalar : simd == "avx2" ? SimdMode::avx2 : SimdMode::automatic);
        if (*gen) {
            const auto s = generate_system(N, L, parse_kernel(kernel), parse_geometry(geometry), seed);
            write_text(out, system_to_json(s) + "\n");
        } else if (*direct) {
            set_num_threads(threads);
            const auto s = load_system(input);
            const auto t = Targets::at_sources(s);
            const auto t0 = Clock::now();
            const auto u = direct_sum(s, t);
            const double secs = seconds_since(t0);
            write_text(out, velocity_csv(t, u.velocity));
            const json j{{"N", s.size()},
                         {"seconds", secs},
                         {"kind", to_string(s.kind)},
                         {"geometry", to_string(s.geometry)},
                         {"threads", threads}};
            if (summary.empty())
                std::cerr << j.dump(2) << "\n";
            else
                write_text(summary, j.dump(2) + "\n");
        } else if (*ewald) {
            set_num_threads(threads);
            const auto s = load_system(input);
            if (kernel_check && parse_kernel(*kernel_check) != s.kind)
                throw UsageError("--kernel " + *kernel_check + " does not match the system file");
            if (geometry_check && parse_geometry(*geometry_check) != s.geometry)
                throw UsageError("--geometry " + *geometry_check + " does not match the system file");
            EwaldParams p{xi, 0.0, 0, P};
            if (tol) {
                const auto sel = select_parameters(s, *tol, xi, P, relative);
                p = {sel.xi, sel.rc, sel.M, sel.P};
            }
            if (rc)
                p.rc = *rc;
            if (M)
                p.M = *M;
            if (p.rc <= 0.0 || (!real_only && p.M <= 0))
                throw UsageError("give --rc and --M, or --tol");
            EwaldOptions opts;
            opts.real_only = real_only;
            opts.fourier.cache_dir = cache_dir;
            const auto t = Targets::at_sources(s);
            const auto t0 = Clock::now();
            EwaldSolver solver(s.kind, s.geometry, s.box_length, p, opts);
            const auto u = solver.evaluate(s, t);
            const double secs = seconds_since(t0);
            write_text(out, velocity_csv(t, real_only ? u.real : u.velocity));
            const auto &st = solver.stats();
            json j{{"N", s.size()},
                   {"seconds", secs},
                   {"kind", to_string(s.kind)},
                   {"geometry", to_string(s.geometry)},
                   {"xi", p.xi},
                   {"rc", p.rc},
                   {"M", p.M},
                   {"P", p.P},
                   {"real_only", real_only},
                   {"threads", threads},
                   {"timings",
                    {{"real", st.real_seconds},
                     {"precompute", st.fourier.times.precompute},
                     {"gridding", st.fourier.times.gridding},
                     {"fft", st.fourier.times.fft},
                     {"scale", st.fourier.times.scale},
                     {"ifft", st.fourier.times.ifft},
                     {"gather", st.fourier.times.gather}}}};
            if (summary.empty())
                std::cerr << j.dump(2) << "\n";
            else
                write_text(summary, j.dump(2) + "\n");
        } else if (*pre) {
            if (!inspect.empty()) {
                const auto t = load_greens(inspect);
                const json j{{"kind", to_string(t.kind)},
                             {"geometry", to_string(t.geometry)},
                             {"Mt", t.Mt},
                             {"Lt", t.Lt},
                             {"R", t.R},
                             {"oversampled", t.oversampled},
                             {"dims", t.dims},
                             {"samples", t.samples.size()}};
                std::cout << j.dump(2) << "\n";
            } else {
                if (cache_dir.empty())
                    throw UsageError("precompute needs --cache-dir or --inspect");
                if (xi <= 0.0)
                    throw UsageError("precompute needs --xi");
                const auto kind = parse_kernel(kernel);
                const auto g = GridSpec::make(parse_geometry(geometry), L, grid_M, P, xi);
                std::vector<GreensKind> needed{kind == KernelKind::rotlet ? GreensKind::harmonic
                                                                          : GreensKind::biharmonic};
                if (g.geometry == Geometry::half_space && needed[0] != GreensKind::harmonic)
                    needed.push_back(GreensKind::harmonic);
                std::filesystem::create_directories(cache_dir);
                for (GreensKind gk : needed) {
                    const auto t0 = Clock::now();
                    cached_greens(gk, g, cache_dir);
                    std::cout << greens_cache_path(cache_dir, gk, g).string() << "  " << seconds_since(t0)
                              << " s\n";
                }
            }
        } else if (*params) {
            const auto s = generate_system(N, L, parse_kernel(kernel), parse_geometry(geometry), seed);
            const auto p = select_parameters(s, eps, xi, P, relative);
            const json j{{"kernel", kernel},  {"geometry", to_string(s.geometry)},
                         {"tolerance", eps},  {"relative", relative},
                         {"xi", p.xi},        {"L", L},
                         {"N", N},            {"seed", seed},
                         {"rc", p.rc},        {"M", p.M},
                         {"P", p.P},          {"eta", p.eta},
                         {"L_ext", p.L_ext},  {"M_ext", p.M_ext},
                         {"kinf", p.kinf},    {"real_estimate", p.real_estimate},
                         {"fourier_estimate", p.fourier_estimate}};
            std::cout << j.dump(2) << "\n";
        } else if (*bench_cmd) {
            set_num_threads(common.threads);
            if (*sf) {
                fs.kind = parse_kernel(kernel);
                fs.geometries = geometries_from(geometries);
                fs.M_values = arithmetic_range(m_range[0], m_range[1], m_range[2]);
                fs.seed = common.seed;
                finish(bench::sweep_fourier_error(fs), common);
            } else if (*sr) {
                rs.kind = parse_kernel(kernel);
                rs.geometries = geometries_from(geometries);
                rs.rc_values = arithmetic_range(rc_range[0], rc_range[1], rc_range[2]);
                rs.seed = common.seed;
                finish(bench::sweep_real_error(rs), common);
            } else if (*ratio) {
                finish(bench::direct_cost_ratio(kinds_from(kernels), sizes, common.reps, common.seed, L), common);
            } else {
                run.N_values = timing_sizes;
                run.reps = common.reps;
                run.seed = common.seed;
                run.cache_dir = cache_dir;
                std::vector<bench::BenchRecord> all;
                for (Geometry g : geometries_from(geometries)) {
                    if (*be) {
                        const auto r = bench::break_even(parse_kernel(kernel), g, run, timing_xi);
                        spdlog::info("{} {}: N* = {:.4g}{}", kernel, to_string(g), r.N_star,
                                     r.bracketed ? "" : " (not bracketed)");
                        for (auto rec : r.records) {
                            rec.metrics["N_star"] = r.N_star;
                            all.push_back(rec);
                        }
                    } else {
                        const auto r = bench::runtime_breakdown(parse_kernel(kernel), g, run, timing_xi);
                        all.insert(all.end(), r.begin(), r.end());
                    }
                }
                finish(all, common);
            }
        }
    } catch (const Error &e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return 3;
    }
    return 0;
}
