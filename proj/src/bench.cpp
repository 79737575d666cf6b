#include "hsewald/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hsewald/direct.hpp"
#include "hsewald/parallel.hpp"

namespace hse::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const std::vector<std::string> sub_phases{"gridding", "fft", "scale", "ifft", "gather", "real"};

Targets strided_targets(const PointSystem &s, std::size_t count) {
    const std::size_t n = s.size();
    count = std::clamp<std::size_t>(count, 1, n);
    const std::size_t stride = n / count;
    Targets t;
    for (std::size_t i = 0; i < count; ++i) {
        t.points.push_back(s.positions[i * stride]);
        t.self_index.push_back(static_cast<std::ptrdiff_t>(i * stride));
    }
    return t;
}

std::vector<Vec3> pick(const std::vector<Vec3> &v, const Targets &sub) {
    std::vector<Vec3> out;
    out.reserve(sub.size());
    for (auto i : sub.self_index)
        out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

BenchRecord base_record(std::string experiment, const PointSystem &s) {
    BenchRecord r;
    r.experiment = std::move(experiment);
    r.kernel = s.kind;
    r.geometry = s.geometry;
    r.N = s.size();
    r.L = s.box_length;
    r.environment = environment_note();
    return r;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

double parse_double(const std::string &s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw UsageError(fmt::format("not a number: '{}'", s));
    return v;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> split_csv_line(std::istream &in) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    cur += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (any)
        fields.push_back(std::move(cur));
    return fields;
}

nlohmann::json number_json(double v) {
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

double number_from_json(const nlohmann::json &j) {
    if (j.is_string())
        return parse_double(j.get<std::string>());
    return j.get<double>();
}

} // namespace

std::string environment_note() {
    static const std::string cpu = [] {
        std::ifstream in("/proc/cpuinfo");
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("model name", 0) == 0) {
                const auto colon = line.find(':');
                if (colon != std::string::npos) {
                    auto v = line.substr(colon + 1);
                    v.erase(0, v.find_first_not_of(' '));
                    return v;
                }
            }
        return std::string("unknown cpu");
    }();
    return fmt::format("cpu={}; threads={}", cpu, num_threads());
}

void check_record(const BenchRecord &r, double slack) {
    bool timed = !r.timings.empty();
    for (const auto &[k, v] : r.metrics)
        timed = timed || k.rfind("time", 0) == 0;
    if (timed && r.repetitions < 3)
        throw UsageError(fmt::format("{}: timing claims need at least 3 repetitions, got {}", r.experiment,
                                     r.repetitions));
    const auto total = r.timings.find("total");
    if (total == r.timings.end())
        return;
    double sum = 0.0;
    for (const auto &p : sub_phases)
        if (auto it = r.timings.find(p); it != r.timings.end())
            sum += it->second;
    if (total->second < sum - slack)
        throw UsageError(fmt::format("{}: total {:g} s below the phase sum {:g} s", r.experiment, total->second, sum));
}

// ---- serialization ---------------------------------------------------------

std::string to_csv(const std::vector<BenchRecord> &records) {
    std::set<std::string> tkeys, mkeys;
    for (const auto &r : records) {
        for (const auto &[k, v] : r.timings)
            tkeys.insert(k);
        for (const auto &[k, v] : r.metrics)
            mkeys.insert(k);
    }
    std::string out = "experiment,kernel,geometry,N,L,xi,rc,M,P,repetitions,environment";
    for (const auto &k : tkeys)
        out += ",time:" + csv_field(k);
    for (const auto &k : mkeys)
        out += "," + csv_field(k);
    out += '\n';
    for (const auto &r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}", csv_field(r.experiment), to_string(r.kernel),
                           to_string(r.geometry), r.N, format_double(r.L), format_double(r.xi), format_double(r.rc),
                           r.M, r.P, r.repetitions, csv_field(r.environment));
        for (const auto &k : tkeys) {
            out += ',';
            if (auto it = r.timings.find(k); it != r.timings.end())
                out += format_double(it->second);
        }
        for (const auto &k : mkeys) {
            out += ',';
            if (auto it = r.metrics.find(k); it != r.metrics.end())
                out += format_double(it->second);
        }
        out += '\n';
    }
    return out;
}

std::vector<BenchRecord> from_csv(const std::string &text) {
    std::istringstream in(text);
    const auto header = split_csv_line(in);
    if (header.size() < 11 || header[0] != "experiment")
        throw UsageError("benchmark CSV: missing header");
    std::vector<BenchRecord> out;
    while (in.peek() != EOF) {
        const auto f = split_csv_line(in);
        if (f.empty() || (f.size() == 1 && f[0].empty()))
            continue;
        if (f.size() != header.size())
            throw UsageError(fmt::format("benchmark CSV: row {} has {} fields, header has {}", out.size() + 1,
                                         f.size(), header.size()));
        BenchRecord r;
        r.experiment = f[0];
        r.kernel = parse_kernel(f[1]);
        r.geometry = parse_geometry(f[2]);
        r.N = std::stoull(f[3]);
        r.L = parse_double(f[4]);
        r.xi = parse_double(f[5]);
        r.rc = parse_double(f[6]);
        r.M = std::stoi(f[7]);
        r.P = std::stoi(f[8]);
        r.repetitions = std::stoi(f[9]);
        r.environment = f[10];
        for (std::size_t c = 11; c < f.size(); ++c) {
            if (f[c].empty())
                continue;
            const std::string &h = header[c];
            if (h.rfind("time:", 0) == 0)
                r.timings[h.substr(5)] = parse_double(f[c]);
            else
                r.metrics[h] = parse_double(f[c]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string to_json(const std::vector<BenchRecord> &records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &r : records) {
        nlohmann::json j{{"experiment", r.experiment},
                         {"kernel", std::string(to_string(r.kernel))},
                         {"geometry", std::string(to_string(r.geometry))},
                         {"N", r.N},
                         {"L", number_json(r.L)},
                         {"xi", number_json(r.xi)},
                         {"rc", number_json(r.rc)},
                         {"M", r.M},
                         {"P", r.P},
                         {"repetitions", r.repetitions},
                         {"environment", r.environment}};
        j["timings"] = nlohmann::json::object();
        for (const auto &[k, v] : r.timings)
            j["timings"][k] = number_json(v);
        j["metrics"] = nlohmann::json::object();
        for (const auto &[k, v] : r.metrics)
            j["metrics"][k] = number_json(v);
        arr.push_back(std::move(j));
    }
    nlohmann::json doc{{"environment", environment_note()}, {"count", records.size()}, {"records", arr}};
    return doc.dump(2);
}

std::vector<BenchRecord> from_json(const std::string &text) {
    std::vector<BenchRecord> out;
    try {
        const auto doc = nlohmann::json::parse(text);
        for (const auto &j : doc.at("records")) {
            BenchRecord r;
            r.experiment = j.at("experiment").get<std::string>();
            r.kernel = parse_kernel(j.at("kernel").get<std::string>());
            r.geometry = parse_geometry(j.at("geometry").get<std::string>());
            r.N = j.at("N").get<std::size_t>();
            r.L = number_from_json(j.at("L"));
            r.xi = number_from_json(j.at("xi"));
            r.rc = number_from_json(j.at("rc"));
            r.M = j.at("M").get<int>();
            r.P = j.at("P").get<int>();
            r.repetitions = j.at("repetitions").get<int>();
            r.environment = j.at("environment").get<std::string>();
            for (const auto &[k, v] : j.at("timings").items())
                r.timings[k] = number_from_json(v);
            for (const auto &[k, v] : j.at("metrics").items())
                r.metrics[k] = number_from_json(v);
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception &e) {
        throw UsageError(fmt::format("benchmark JSON: {}", e.what()));
    }
    return out;
}

void write_records(const std::vector<BenchRecord> &records, const std::filesystem::path &stem) {
    if (stem.has_parent_path())
        std::filesystem::create_directories(stem.parent_path());
    auto write = [](const std::filesystem::path &p, const std::string &text) {
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw ResourceError(fmt::format("cannot write {}", p.string()));
        out << text;
    };
    write(std::filesystem::path(stem.string() + ".csv"), to_csv(records));
    write(std::filesystem::path(stem.string() + ".json"), to_json(records));
}

// ---- statistics ------------------------------------------------------------

double median(std::vector<double> v) {
    if (v.empty())
        throw UsageError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2)
        throw UsageError("line fit needs at least two paired samples");
    const double n = double(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0))
        throw UsageError("line fit needs distinct abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly).slope;
}

double coefficient_of_variation(const std::vector<double> &v) {
    if (v.empty())
        throw UsageError("empty sample");
    const double n = double(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / n) / m;
}

// ---- error sweeps ----------------------------------------------------------

std::vector<BenchRecord> sweep_fourier_error(const FourierSweep &cfg) {
    std::vector<BenchRecord> out;
    const double pf = kernel_prefactor(cfg.kind);
    for (Geometry geom : cfg.geometries) {
        const auto s = generate_system(cfg.N, cfg.L, cfg.kind, geom, cfg.seed);
        const Targets t = strided_targets(s, cfg.max_targets);
        const auto d = direct_sum(s, t);
        const double rc_ref = std::min(9.0 / cfg.xi, cfg.L * std::sqrt(3.0));
        const auto real = real_space_sum(s, {cfg.xi, rc_ref}, t);
        std::vector<Vec3> exact(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            exact[i] = d.velocity[i] - real.velocity[i];
        const double U = rms_norm(d.velocity) / pf;
        const double Q = quantity_q(s, geom == Geometry::half_space);
        for (int M : cfg.M_values) {
            const int P = std::min(max_support_width,
                                   extension_support(cfg.xi, cfg.L / M, cfg.support_tolerance, cfg.min_P));
            const GridSpec g = GridSpec::make(geom, cfg.L, M, P, cfg.xi);
            const auto t0 = Clock::now();
            const auto f = fourier_space_sum(s, g, t);
            const double elapsed = seconds_since(t0);
            const double err = rms_error(exact, f.velocity) / pf;
            const double est =
                fourier_truncation_estimate(cfg.kind, Q, cfg.xi, g.kinf, cfg.L, estimate_radius(g.Lt));
            BenchRecord r = base_record("sweep-fourier", s);
            r.xi = cfg.xi;
            r.rc = rc_ref;
            r.M = g.M;
            r.P = g.P;
            r.metrics = {{"error_abs", err},     {"error_rel", err / U},  {"estimate", est},
                         {"estimate_rel", est / U}, {"kinf", g.kinf},       {"reference_rms", U},
                         {"targets", double(t.size())}, {"seconds", elapsed}};
            r.repetitions = 1;
            spdlog::debug("sweep-fourier {} M={} P={} err={:.3g} est={:.3g}", to_string(geom), g.M, g.P, err / U,
                          est / U);
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<BenchRecord> sweep_real_error(const RealSweep &cfg) {
    std::vector<BenchRecord> out;
    const double pf = kernel_prefactor(cfg.kind);
    for (Geometry geom : cfg.geometries) {
        const auto s = generate_system(cfg.N, cfg.L, cfg.kind, geom, cfg.seed);
        const Targets t = strided_targets(s, cfg.max_targets);
        const double U = rms_norm(direct_sum(s, t).velocity) / pf;
        const double rc_ref = std::min(9.0 / cfg.xi, cfg.L * std::sqrt(3.0));
        const auto ref = real_space_sum(s, {cfg.xi, rc_ref}, t);
        const double Q = quantity_q(s, geom == Geometry::half_space);
        for (double rc : cfg.rc_values) {
            const auto t0 = Clock::now();
            const auto v = real_space_sum(s, {cfg.xi, rc}, t);
            const double elapsed = seconds_since(t0);
            const double err = rms_error(ref.velocity, v.velocity) / pf;
            const double est = real_truncation_estimate(cfg.kind, Q, cfg.xi, rc, cfg.L);
            BenchRecord r = base_record("sweep-real", s);
            r.xi = cfg.xi;
            r.rc = rc;
            r.metrics = {{"error_abs", err},          {"error_rel", err / U},  {"estimate", est},
                         {"estimate_rel", est / U},   {"reference_rms", U},    {"reference_rc", rc_ref},
                         {"targets", double(t.size())}, {"seconds", elapsed}};
            out.push_back(std::move(r));
        }
    }
    return out;
}

// ---- timing ----------------------------------------------------------------

double time_direct(const PointSystem &system, int reps) {
    const Targets t = Targets::at_sources(system);
    direct_sum(system, t); // warm-up
    std::vector<double> v;
    for (int r = 0; r < std::max(reps, 1); ++r) {
        const auto t0 = Clock::now();
        const auto d = direct_sum(system, t);
        v.push_back(seconds_since(t0));
    }
    return median(v);
}

std::vector<BenchRecord> direct_cost_ratio(const std::vector<KernelKind> &kinds,
                                           const std::vector<std::size_t> &N_values, int reps,
                                           std::uint64_t seed, double L) {
    std::vector<BenchRecord> out;
    for (KernelKind kind : kinds)
        for (std::size_t N : N_values) {
            const auto fs = generate_system(N, L, kind, Geometry::free_space, seed);
            const auto hs = generate_system(N, L, kind, Geometry::half_space, seed);
            const Targets tf_pts = Targets::at_sources(fs), th_pts = Targets::at_sources(hs);
            direct_sum(fs, tf_pts);
            direct_sum(hs, th_pts);
            // alternate so both geometries see the same machine state
            std::vector<double> free_t, half_t;
            for (int r = 0; r < std::max(reps, 1); ++r) {
                auto t0 = Clock::now();
                direct_sum(fs, tf_pts);
                free_t.push_back(seconds_since(t0));
                t0 = Clock::now();
                direct_sum(hs, th_pts);
                half_t.push_back(seconds_since(t0));
            }
            const double tf = median(free_t), th = median(half_t);
            BenchRecord r = base_record("ratio", hs);
            r.repetitions = reps;
            r.metrics = {{"time_free", tf}, {"time_half", th}, {"ratio", th / tf}};
            spdlog::debug("ratio {} N={} free={:.3g} half={:.3g}", to_string(kind), N, tf, th);
            out.push_back(std::move(r));
        }
    return out;
}

double default_xi(KernelKind kind) {
    switch (kind) {
    case KernelKind::stokeslet:
        return 6.0;
    case KernelKind::stresslet:
        return 5.8;
    case KernelKind::rotlet:
        return 7.0;
    }
    return 6.0;
}

std::vector<BenchRecord> runtime_breakdown(KernelKind kind, Geometry geometry, const TimingRun &run,
                                           std::optional<double> xi_opt) {
    const double xi = xi_opt.value_or(default_xi(kind));
    std::vector<BenchRecord> out;
    for (std::size_t N : run.N_values) {
        const double L = std::cbrt(double(N) / run.density);
        const auto s = generate_system(N, L, kind, geometry, run.seed);
        const Targets all = Targets::at_sources(s);
        const Targets sub = strided_targets(s, run.direct_targets);

        std::vector<double> direct_times;
        VelocityResult d;
        for (int r = 0; r < run.reps; ++r) {
            const auto t0 = Clock::now();
            d = direct_sum(s, sub);
            direct_times.push_back(seconds_since(t0) * double(N) / double(sub.size()));
        }

        EwaldOptions opt;
        opt.fourier.cache_dir = run.cache_dir;
        double tol = run.tolerance, gate_error = 0.0;
        SelectedParameters p;
        std::unique_ptr<EwaldSolver> solver;
        for (int attempt = 0;; ++attempt) {
            p = select_parameters(s, tol, xi, 16, true);
            solver = std::make_unique<EwaldSolver>(kind, geometry, L, EwaldParams{xi, p.rc, p.M, p.P}, opt);
            const auto warm = solver->evaluate(s, all);
            gate_error = relative_rms_error(d.velocity, pick(warm.velocity, sub));
            if (gate_error <= run.gate)
                break;
            spdlog::info("{} {} N={}: gate error {:.3g} at tolerance {:g}; tightening", to_string(kind),
                         to_string(geometry), N, gate_error, tol);
            if (attempt == 4)
                throw InfeasibleError(fmt::format("gate {:g} not met for {} {} at N={} (error {:.3g})", run.gate,
                                                  to_string(kind), to_string(geometry), N, gate_error));
            tol *= 0.5;
        }

        struct Rep {
            double total;
            EwaldStats stats;
        };
        std::vector<Rep> reps;
        for (int r = 0; r < run.reps; ++r) {
            solver->reset_stats();
            const auto t0 = Clock::now();
            const auto e = solver->evaluate(s, all);
            reps.push_back({seconds_since(t0), solver->stats()});
        }
        std::sort(reps.begin(), reps.end(), [](const Rep &a, const Rep &b) { return a.total < b.total; });
        const Rep &mid = reps[reps.size() / 2];
        const PhaseTimes &ph = mid.stats.fourier.times;

        BenchRecord rec = base_record("breakdown", s);
        rec.xi = xi;
        rec.rc = p.rc;
        rec.M = solver->grid().M;
        rec.P = p.P;
        rec.repetitions = run.reps;
        rec.timings = {{"gridding", ph.gridding}, {"fft", ph.fft},
                       {"scale", ph.scale},       {"ifft", ph.ifft},
                       {"gather", ph.gather},     {"real", mid.stats.real_seconds},
                       {"total", mid.total},      {"precompute", ph.precompute}};
        const double direct = median(direct_times);
        rec.metrics = {{"gate_error", gate_error},
                       {"tolerance", tol},
                       {"time_direct", direct},
                       {"direct_targets", double(sub.size())},
                       {"speedup", direct / mid.total},
                       {"ffts", double(mid.stats.fourier.ffts)},
                       {"iffts", double(mid.stats.fourier.iffts)},
                       {"real_estimate", p.real_estimate},
                       {"fourier_estimate", p.fourier_estimate}};
        check_record(rec);
        spdlog::info("{} {} N={} ewald {:.3g} s, direct {:.3g} s, gate {:.2g}", to_string(kind), to_string(geometry),
                     N, mid.total, direct, gate_error);
        out.push_back(std::move(rec));
    }
    return out;
}

BreakEven break_even(const std::vector<BenchRecord> &timings) {
    BreakEven be;
    be.records = timings;
    std::sort(be.records.begin(), be.records.end(),
              [](const BenchRecord &a, const BenchRecord &b) { return a.N < b.N; });
    std::vector<double> logN, logr;
    for (const auto &r : be.records) {
        logN.push_back(std::log(double(r.N)));
        logr.push_back(std::log(r.timings.at("total") / r.metrics.at("time_direct")));
    }
    be.N_star = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logr.size(); ++i) {
        if (logr[i] >= 0.0)
            continue;
        if (i == 0) {
            be.N_star = double(be.records[0].N);
        } else {
            const double f = logr[i - 1] / (logr[i - 1] - logr[i]);
            be.N_star = std::exp(logN[i - 1] + f * (logN[i] - logN[i - 1]));
            be.bracketed = true;
        }
        break;
    }
    return be;
}

BreakEven break_even(KernelKind kind, Geometry geometry, const TimingRun &run, std::optional<double> xi) {
    return break_even(runtime_breakdown(kind, geometry, run, xi));
}

BenchRecord amortization(KernelKind kind, Geometry geometry, std::size_t N, int solves, std::uint64_t seed,
                         double density) {
    const double L = std::cbrt(double(N) / density);
    const double xi = default_xi(kind);
    const auto s = generate_system(N, L, kind, geometry, seed);
    const auto p = select_parameters(s, 0.25e-8, xi, 16, true);
    const Targets all = Targets::at_sources(s);
    EwaldSolver solver(kind, geometry, L, {xi, p.rc, p.M, p.P});
    solver.reset_stats();
    const double pre = solver.stats().fourier.times.precompute;
    double cumulative = 0.0;
    for (int i = 0; i < solves; ++i) {
        const auto t0 = Clock::now();
        const auto e = solver.evaluate(s, all);
        cumulative += seconds_since(t0);
    }
    BenchRecord r = base_record("amortization", s);
    r.xi = xi;
    r.rc = p.rc;
    r.M = solver.grid().M;
    r.P = p.P;
    r.repetitions = solves;
    r.timings = {{"precompute", pre}, {"total", cumulative}};
    r.metrics = {{"solves", double(solves)}, {"precompute_share", pre / (pre + cumulative)}};
    return r;
}

} // namespace hse::bench
