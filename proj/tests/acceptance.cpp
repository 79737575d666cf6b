// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, and --out DIR to keep the benchmark records.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hsewald/bench.hpp"
#include "hsewald/direct.hpp"
#include "hsewald/estimates.hpp"
#include "hsewald/ewald.hpp"
#include "test_util.hpp"

using namespace hse;
using namespace hse::bench;

namespace {

// ---- pinned tolerances ------------------------------------------------------

constexpr double oracle_tolerance = 0.5e-8;
constexpr double oracle_seconds = 60.0;
constexpr double noslip_tolerance = 1e-12;
constexpr double invariance_tolerance = 1e-8;
constexpr double slope_tolerance = 0.15;
constexpr double rotlet_band = 10.0;
// errors and estimates below this relative level sit on the roundoff floor
constexpr double fourier_floor = 1e-11;
constexpr double real_floor = 1e-13;
// the real-space estimates are large-(xi r_c) asymptotics
constexpr double real_window_xirc = 1.5;
constexpr double greens_tolerance = 1e-10;
constexpr double biharmonic_tolerance = 1e-6;
constexpr double direct_slope = 2.0, direct_slope_band = 0.1;
constexpr double ewald_slope_max = 1.3;
constexpr double ratio_lo = 2.5, ratio_hi = 5.0;
constexpr double fd_tolerance = 1e-6;

const std::vector<KernelKind> all_kinds{KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet};
const std::vector<Geometry> both_geometries{Geometry::free_space, Geometry::half_space};

std::string out_dir;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "!! ") + std::move(note));
    }
};

std::string name(KernelKind k) { return std::string(to_string(k)); }
std::string name(Geometry g) { return g == Geometry::free_space ? "FS" : "HS"; }

void keep(const std::vector<BenchRecord> &records, const std::string &stem) {
    if (!out_dir.empty())
        write_records(records, std::filesystem::path(out_dir) / stem);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1, 2 -------------------------------------------------------------------

Outcome oracle_identity(Geometry geom) {
    Outcome o;
    for (KernelKind kind : all_kinds) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto s = generate_system(2000, 3.0, kind, geom, 11);
        const auto p = select_parameters(s, 1e-8, 4.67);
        const auto t = Targets::at_sources(s);
        const auto e = ewald_sum(s, {p.xi, p.rc, p.M, p.P}, t);
        const double ewald_seconds = seconds_since(t0);
        const auto d = direct_sum(s, t);
        const double rel = relative_rms_error(d, e);
        o.require(rel <= oracle_tolerance && ewald_seconds <= oracle_seconds,
                  fmt::format("{}: rc={:.3f} M={} P={} rel {:.2e} <= {:.1e}, {:.1f} s <= {:.0f} s", name(kind), p.rc,
                              p.M, p.P, rel, oracle_tolerance, ewald_seconds, oracle_seconds));
    }
    return o;
}

// ---- 3 ----------------------------------------------------------------------

Outcome no_slip() {
    Outcome o;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec3> wall;
    for (int i = 0; i < 20; ++i)
        wall.push_back({U(rng), U(rng), 0.0});
    for (KernelKind kind : all_kinds) {
        const auto s = generate_system(50, 1.0, kind, Geometry::half_space, 8);
        const double interior = rms_norm(direct_sum_half(s, Targets::at_sources(s)).velocity);
        const auto w = direct_sum_half(s, Targets::at_points(wall));
        double worst = 0.0;
        for (const auto &u : w.velocity)
            worst = std::max(worst, norm(u));
        o.require(worst <= noslip_tolerance * interior,
                  fmt::format("{}: max |u| / RMS {:.2e} <= {:.0e}", name(kind), worst / interior, noslip_tolerance));
    }
    return o;
}

// ---- 4 ----------------------------------------------------------------------

Outcome xi_invariance() {
    Outcome o;
    for (Geometry geom : both_geometries) {
        const auto s = generate_system(500, 1.0, KernelKind::stokeslet, geom, 4);
        const auto t = Targets::at_sources(s);
        std::vector<std::vector<Vec3>> u;
        for (double xi : {3.0, 5.0, 7.0}) {
            const auto p = select_parameters(s, 1e-9, xi);
            u.push_back(ewald_sum(s, {xi, p.rc, p.M, p.P}, t).velocity);
        }
        double worst = 0.0;
        for (std::size_t a = 0; a < u.size(); ++a)
            for (std::size_t b = a + 1; b < u.size(); ++b)
                worst = std::max(worst, relative_rms_error(u[a], u[b]));
        o.require(worst <= invariance_tolerance,
                  fmt::format("{}: worst pairwise rel {:.2e} <= {:.0e}", name(geom), worst, invariance_tolerance));
    }
    return o;
}

// ---- 5 ----------------------------------------------------------------------

// slope of log(error) against x over the records passing `use`
double decay_slope(const std::vector<BenchRecord> &recs, Geometry geom, const std::function<double(const BenchRecord &)> &x,
                   const std::function<bool(const BenchRecord &)> &use) {
    std::vector<double> xs, ys;
    for (const auto &r : recs)
        if (r.geometry == geom && use(r)) {
            xs.push_back(x(r));
            ys.push_back(std::log(r.metrics.at("error_rel")));
        }
    return xs.size() >= 3 ? fit_line(xs, ys).slope : std::nan("");
}

Outcome fourier_decay() {
    Outcome o;
    const double xi = 3.49;
    const double expected = -1.0 / (4.0 * xi * xi);
    std::vector<BenchRecord> all;
    for (KernelKind kind : all_kinds) {
        FourierSweep cfg;
        cfg.kind = kind;
        cfg.N = 10000;
        cfg.L = 3.0;
        cfg.xi = xi;
        cfg.max_targets = 500;
        for (int M = 10; M <= 50; M += 4)
            cfg.M_values.push_back(M);
        const auto recs = sweep_fourier_error(cfg);
        all.insert(all.end(), recs.begin(), recs.end());

        auto above_floor = [](const BenchRecord &r) {
            return r.metrics.at("estimate_rel") >= fourier_floor && r.metrics.at("error_rel") >= fourier_floor;
        };
        double worst_ratio = 0.0, best_ratio = 1e300;
        int compared = 0;
        for (const auto &r : recs)
            if (r.geometry == Geometry::half_space && above_floor(r)) {
                const double q = r.metrics.at("error_rel") / r.metrics.at("estimate_rel");
                worst_ratio = std::max(worst_ratio, q);
                best_ratio = std::min(best_ratio, q);
                ++compared;
            }
        if (kind == KernelKind::rotlet)
            o.require(compared >= 3 && worst_ratio <= rotlet_band && best_ratio >= 1.0 / rotlet_band,
                      fmt::format("rotlet HS: measured/estimate in [{:.2f}, {:.2f}] over {} M, band x{:.0f}",
                                  best_ratio, worst_ratio, compared, rotlet_band));
        else
            o.require(compared >= 3 && worst_ratio <= 1.0,
                      fmt::format("{} HS: max measured/estimate {:.2f} <= 1 over {} M", name(kind), worst_ratio,
                                  compared));

        if (kind == KernelKind::rotlet)
            continue;
        // decay region: above the floor and past the pre-asymptotic start
        auto window = [&](const BenchRecord &r) { return above_floor(r) && r.metrics.at("error_rel") <= 1e-2; };
        auto k2 = [](const BenchRecord &r) { return r.metrics.at("kinf") * r.metrics.at("kinf"); };
        for (Geometry geom : both_geometries) {
            const double slope = decay_slope(recs, geom, k2, window);
            o.require(std::abs(slope / expected - 1.0) <= slope_tolerance,
                      fmt::format("{} {}: slope vs kinf^2 {:.4f}, expected {:.4f} +-{:.0f}%", name(kind), name(geom),
                                  slope, expected, 100 * slope_tolerance));
        }
    }
    keep(all, "sweep_fourier");
    return o;
}

// ---- 6 ----------------------------------------------------------------------

Outcome real_decay() {
    Outcome o;
    const double xi = 4.67;
    std::vector<BenchRecord> all;
    for (KernelKind kind : {KernelKind::stokeslet, KernelKind::stresslet}) {
        RealSweep cfg;
        cfg.kind = kind;
        cfg.xi = xi;
        for (int i = 1; i <= 30; ++i)
            cfg.rc_values.push_back(0.05 * i);
        const auto recs = sweep_real_error(cfg);
        all.insert(all.end(), recs.begin(), recs.end());
        auto window = [&](const BenchRecord &r) {
            return xi * r.rc >= real_window_xirc && r.metrics.at("error_rel") >= real_floor &&
                   r.metrics.at("estimate_rel") >= real_floor;
        };
        for (Geometry geom : both_geometries) {
            double worst = 0.0, worst_rc = 0.0;
            int compared = 0;
            for (const auto &r : recs)
                if (r.geometry == geom && window(r)) {
                    const double q = r.metrics.at("error_rel") / r.metrics.at("estimate_rel");
                    if (q > worst) {
                        worst = q;
                        worst_rc = r.rc;
                    }
                    ++compared;
                }
            o.require(compared >= 3 && worst <= 1.0,
                      fmt::format("{} {}: max measured/estimate {:.2f} (rc {:.2f}) <= 1 over {} rc", name(kind),
                                  name(geom), worst, worst_rc, compared));
            const double slope =
                decay_slope(recs, geom, [](const BenchRecord &r) { return r.rc * r.rc; }, window);
            o.require(std::abs(slope / (-xi * xi) - 1.0) <= slope_tolerance,
                      fmt::format("{} {}: slope vs rc^2 {:.2f}, expected {:.2f} +-{:.0f}%", name(kind), name(geom),
                                  slope, -xi * xi, 100 * slope_tolerance));
        }
    }
    keep(all, "sweep_real");
    return o;
}

// ---- 7 ----------------------------------------------------------------------

template <class F>
double simpson(F &&f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

Outcome greens_correctness() {
    Outcome o;
    const double sigma = 0.1;
    const auto g = GridSpec::make(Geometry::free_space, 2.0, 60, 16, 1.0);
    const Vec3 c{1.0, 1.0, 1.0};
    auto node = [&](int i, int j, int k) {
        return Vec3{g.origin[0] + i * g.h, g.origin[1] + j * g.h, g.origin[2] + k * g.h};
    };
    Grid3 rho(g.dims);
    const double norm3 = std::pow(2 * pi * sigma * sigma, -1.5);
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k) {
                const Vec3 d = node(i, j, k) - c;
                rho.at(i, j, k) = norm3 * std::exp(-dot(d, d) / (2 * sigma * sigma));
            }
    const Grid3 phi = convolve(precompute_greens(GreensKind::harmonic, g), g, rho);
    double worst = 0.0;
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k) {
                const double r = norm(node(i, j, k) - c);
                if (r > 0.8)
                    continue;
                const double exact =
                    r < 1e-12 ? std::sqrt(2.0 / pi) / sigma : std::erf(r / (sigma * std::sqrt(2.0))) / r;
                worst = std::max(worst, std::abs(phi.at(i, j, k) - exact) / exact);
            }
    o.require(worst <= greens_tolerance,
              fmt::format("Gaussian erf potential: max rel {:.2e} <= {:.0e}", worst, greens_tolerance));

    // k -> 0 limit of the biharmonic transform, away from R = 1 so R and R^2 differ
    const double R = 1.7, target = pi * std::pow(R, 4);
    double lim_err = 0.0;
    for (double k : {1e-4, 1e-5, 1e-6})
        lim_err = std::max(lim_err, std::abs(truncated_greens_hat(GreensKind::biharmonic, R, k) / target - 1.0));
    const double quad0 = 4 * pi * simpson([](double r) { return r * r * r; }, 0.0, R, 2000);
    o.require(lim_err <= biharmonic_tolerance && std::abs(quad0 / target - 1.0) <= 1e-12,
              fmt::format("biharmonic k->0: rel {:.2e} to pi R^4 <= {:.0e}", lim_err, biharmonic_tolerance));
    // the closed-form branch against the radial transform
    double branch = 0.0;
    for (double k : {1.0 / R, 2.0, 5.0, 11.0}) {
        const double quad =
            4 * pi * simpson([&](double r) { return r * r * r * (k * r == 0 ? 1.0 : std::sin(k * r) / (k * r)); },
                             0.0, R, 4000);
        branch = std::max(branch, std::abs(truncated_greens_hat(GreensKind::biharmonic, R, k) - quad) /
                                      std::abs(quad));
    }
    o.require(branch <= biharmonic_tolerance,
              fmt::format("biharmonic closed form vs radial quadrature: rel {:.2e}", branch));
    return o;
}

// ---- 8 ----------------------------------------------------------------------

Outcome fft_accounting() {
    Outcome o;
    const std::map<std::pair<KernelKind, Geometry>, std::pair<int, int>> expected{
        {{KernelKind::stokeslet, Geometry::half_space}, {7, 6}},
        {{KernelKind::stresslet, Geometry::half_space}, {21, 6}},
        {{KernelKind::rotlet, Geometry::half_space}, {6, 6}},
        {{KernelKind::stokeslet, Geometry::free_space}, {3, 3}},
        {{KernelKind::stresslet, Geometry::free_space}, {9, 3}},
        {{KernelKind::rotlet, Geometry::free_space}, {3, 3}}};
    for (const auto &[key, want] : expected) {
        const auto [kind, geom] = key;
        const auto s = generate_system(30, 1.0, kind, geom, 3);
        FourierSolver solver(kind, GridSpec::make(geom, 1.0, 10, 8, 4.0));
        solver.evaluate(s, Targets::at_sources(s));
        const auto &st = solver.stats();
        o.require(st.ffts == want.first && st.iffts == want.second,
                  fmt::format("{} {}: {}/{} (expected {}/{})", name(kind), name(geom), st.ffts, st.iffts, want.first,
                              want.second));
    }
    return o;
}

// ---- 9 ----------------------------------------------------------------------

Outcome complexity() {
    Outcome o;
    const int reps = 3;
    const int direct_reps = 7;

    // direct sums over all sources
    const std::vector<std::size_t> direct_N{1000, 2000, 4000, 8000};
    const auto ratios = direct_cost_ratio(all_kinds, direct_N, direct_reps, 7);
    keep(ratios, "ratio");
    std::map<KernelKind, double> mean_ratio;
    for (KernelKind kind : all_kinds) {
        std::vector<double> N, tf, th, q;
        for (const auto &r : ratios)
            if (r.kernel == kind) {
                N.push_back(double(r.N));
                tf.push_back(r.metrics.at("time_free"));
                th.push_back(r.metrics.at("time_half"));
                q.push_back(r.metrics.at("ratio"));
            }
        const double sf = loglog_slope(N, tf), sh = loglog_slope(N, th);
        o.require(std::abs(sf - direct_slope) <= direct_slope_band && std::abs(sh - direct_slope) <= direct_slope_band,
                  fmt::format("{} direct slope FS {:.3f}, HS {:.3f} (2 +- {})", name(kind), sf, sh,
                              direct_slope_band));
        const double lo = *std::min_element(q.begin(), q.end()), hi = *std::max_element(q.begin(), q.end());
        mean_ratio[kind] = std::accumulate(q.begin(), q.end(), 0.0) / double(q.size());
        o.require(lo >= ratio_lo && hi <= ratio_hi,
                  fmt::format("{} HS/FS direct ratio in [{:.2f}, {:.2f}], required [{}, {}], CV {:.1f}%", name(kind),
                              lo, hi, ratio_lo, ratio_hi, 100 * coefficient_of_variation(q)));
    }
    o.require(mean_ratio[KernelKind::rotlet] < mean_ratio[KernelKind::stokeslet] &&
                  mean_ratio[KernelKind::stokeslet] < mean_ratio[KernelKind::stresslet],
              fmt::format("ratio ordering rotlet {:.2f} < stokeslet {:.2f} < stresslet {:.2f}",
                          mean_ratio[KernelKind::rotlet], mean_ratio[KernelKind::stokeslet],
                          mean_ratio[KernelKind::stresslet]));

    // Ewald timings at constant density
    TimingRun run;
    run.N_values = {1000, 2000, 5000, 10000, 20000, 50000, 100000};
    run.reps = reps;
    run.seed = 7;
    std::vector<BenchRecord> all;
    std::map<std::pair<KernelKind, Geometry>, BreakEven> be;
    for (KernelKind kind : all_kinds)
        for (Geometry geom : both_geometries) {
            const auto recs = runtime_breakdown(kind, geom, run);
            all.insert(all.end(), recs.begin(), recs.end());
            std::vector<double> N, T;
            bool wins = true;
            for (const auto &r : recs) {
                if (r.N >= 10000) {
                    N.push_back(double(r.N));
                    T.push_back(r.timings.at("total"));
                }
                if (r.N >= 50000)
                    wins = wins && r.timings.at("total") < r.metrics.at("time_direct");
            }
            const double slope = loglog_slope(N, T);
            o.require(slope <= ewald_slope_max,
                      fmt::format("{} {} Ewald slope over [1e4, 1e5] {:.3f} <= {}", name(kind), name(geom), slope,
                                  ewald_slope_max));
            const auto &last = recs.back();
            o.require(wins, fmt::format("{} {} Ewald beats direct for N >= 5e4 (N=1e5: {:.1f} s vs {:.1f} s)",
                                        name(kind), name(geom), last.timings.at("total"),
                                        last.metrics.at("time_direct")));
            be[{kind, geom}] = break_even(recs);
        }
    keep(all, "breakdown");
    for (KernelKind kind : all_kinds) {
        const auto &h = be[{kind, Geometry::half_space}], &f = be[{kind, Geometry::free_space}];
        o.require(h.N_star <= f.N_star,
                  fmt::format("{} break-even HS {:.0f}{} <= FS {:.0f}{}", name(kind), h.N_star,
                              h.bracketed ? "" : " (edge)", f.N_star, f.bracketed ? "" : " (edge)"));
    }
    return o;
}

// ---- 10 ---------------------------------------------------------------------

Outcome derivatives() {
    using namespace hse::testing;
    Outcome o;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(-1.0, 1.0), X(1.0, 8.0), Rr(0.1, 1.5);
    auto point = [&] {
        Vec3 p;
        do
            p = {U(rng), U(rng), U(rng)};
        while (norm(p) < 0.2);
        return p;
    };
    double radial = 0, harm = 0, screened = 0, phi = 0, phi_real = 0;
    for (int n = 0; n < 100; ++n) {
        const double xi = X(rng), r = Rr(rng), h = 1e-5 * r;
        const auto d = f_derivs(r, xi);
        radial = std::max({radial,
                           std::abs(fd_derivative([&](double s) { return f_derivs(s, xi).f; }, r, h) - d.d1) /
                               std::abs(d.d1),
                           std::abs(fd_derivative([&](double s) { return f_derivs(s, xi).d1; }, r, h) - d.d2) /
                               std::abs(d.d2),
                           std::abs(fd_derivative([&](double s) { return f_derivs(s, xi).d2; }, r, h) - d.d3) /
                               std::abs(d.d3)});

        const Vec3 p = point();
        const double hp = 1e-5;
        const auto hd = harmonic_derivs(p);
        harm = std::max({harm, rel_diff(hd.grad, fd_gradient([](const Vec3 &z) { return harmonic_derivs(z).G; }, p, hp)),
                         rel_diff(hd.hess, fd_jacobian([](const Vec3 &z) { return harmonic_derivs(z).grad; }, p, hp)),
                         rel_diff(hd.third,
                                  fd_jacobian_mat([](const Vec3 &z) { return harmonic_derivs(z).hess; }, p, hp))});

        const double xs = X(rng) / 4.0;
        const auto sd = harmonic_real_derivs(p, xs);
        screened = std::max(
            {screened,
             rel_diff(sd.grad, fd_gradient([&](const Vec3 &z) { return harmonic_real_derivs(z, xs).G; }, p, hp)),
             rel_diff(sd.hess, fd_jacobian([&](const Vec3 &z) { return harmonic_real_derivs(z, xs).grad; }, p, hp)),
             rel_diff(sd.third,
                      fd_jacobian_mat([&](const Vec3 &z) { return harmonic_real_derivs(z, xs).hess; }, p, hp))});

        const Vec3 y{0.5 + 0.4 * U(rng), 0.5 + 0.4 * U(rng), 0.1 + 0.4 * (U(rng) + 1)};
        const Vec3 x{0.5 + 0.4 * U(rng), 0.5 + 0.4 * U(rng), 0.1 + 0.4 * (U(rng) + 1)};
        const Vec3 a{U(rng), U(rng), U(rng)}, b{U(rng), U(rng), U(rng)};
        for (KernelKind kind : all_kinds) {
            const auto c = correction_phi(kind, y, a, b, x);
            phi = std::max(phi, rel_diff(c.grad, fd_gradient([&](const Vec3 &z) {
                                             return correction_phi(kind, y, a, b, z).phi;
                                         }, x, hp)));
            const auto cr = correction_phi_real(kind, y, a, b, x, xs);
            phi_real = std::max(phi_real, rel_diff(cr.grad, fd_gradient([&](const Vec3 &z) {
                                                       return correction_phi_real(kind, y, a, b, z, xs).phi;
                                                   }, x, hp)));
        }
    }
    o.require(radial <= fd_tolerance, fmt::format("f', f'', f''': {:.1e}", radial));
    o.require(harm <= fd_tolerance, fmt::format("grad G .. grad^3 G: {:.1e}", harm));
    o.require(screened <= fd_tolerance, fmt::format("screened grad G .. grad^3 G: {:.1e}", screened));
    o.require(phi <= fd_tolerance, fmt::format("grad phi: {:.1e}", phi));
    o.require(phi_real <= fd_tolerance, fmt::format("screened grad phi: {:.1e}", phi_real));
    return o;
}

} // namespace

int main(int argc, char **argv) {
    spdlog::set_level(spdlog::level::warn);
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc)
            out_dir = argv[++i];
        else
            only.insert(std::stoi(a));
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle identity, free space", [] { return oracle_identity(Geometry::free_space); }},
        {"oracle identity, half space", [] { return oracle_identity(Geometry::half_space); }},
        {"no-slip at the wall", no_slip},
        {"xi invariance", xi_invariance},
        {"Fourier error decay", fourier_decay},
        {"real-space error decay", real_decay},
        {"truncated Green's functions", greens_correctness},
        {"FFT accounting", fft_accounting},
        {"complexity and ordering", complexity},
        {"derivative consistency", derivatives},
    };

    std::printf("environment: %s\n", environment_note().c_str());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!only.empty() && !only.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o.require(false, fmt::format("exception: {}", e.what()));
        }
        failed += !o.pass;
        std::printf("criterion %2d  %-30s %s  (%.1f s)\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    seconds_since(t0));
        for (const auto &n : o.notes)
            std::printf("      %s\n", n.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
