#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <spdlog/spdlog.h>

#include "fftw_util.hpp"
#include "hsewald/fourier.hpp"

namespace hse {

namespace {

constexpr char magic[4] = {'S', 'E', 'G', 'T'};
constexpr std::uint32_t format_version = 1;

template <class T>
void write_le(std::ostream &os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char *>(b), sizeof(T));
}

template <class T>
T read_le(std::istream &is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char *>(b), sizeof(T)))
        throw ConfigurationError("truncated Green's table file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

// In-place 3D DCT-I over an n0 x n1 x n2 block (logical even DFT of size
// 2(n-1) per dimension).
void dct1_3d(double *data, int n0, int n1, int n2) {
    detail::Plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        detail::fftw_use_threads(1);
        plan = detail::Plan(fftw_plan_r2r_3d(n0, n1, n2, data, data, FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00,
                                             FFTW_ESTIMATE));
    }
    if (!plan)
        throw ResourceError("FFTW failed to create a DCT plan");
    plan.execute();
}

double biharmonic_series(double R, double k) {
    // 4 pi sum_n (-1)^n k^2n R^(2n+4) / ((2n+4)(2n+1)!)
    const double x2 = (R * k) * (R * k);
    double term = 1.0; // x^2n / (2n+1)!
    double sum = 0.0;
    for (int n = 0; n < 20; ++n) {
        sum += (n % 2 ? -term : term) / (2 * n + 4);
        term *= x2 / ((2 * n + 2) * (2 * n + 3));
    }
    return 4.0 * pi * std::pow(R, 4) * sum;
}

} // namespace

std::string to_string(GreensKind kind) { return kind == GreensKind::harmonic ? "harmonic" : "biharmonic"; }

double truncated_greens_hat(GreensKind kind, double R, double k) {
    if (!(R > 0.0))
        throw DomainError("truncation radius must be positive");
    if (!(k >= 0.0))
        throw DomainError("wavenumber must be non-negative");
    if (kind == GreensKind::harmonic) {
        if (k == 0.0)
            return 2.0 * pi * R * R;
        const double s = std::sin(0.5 * R * k) / k;
        return 8.0 * pi * s * s;
    }
    const double x = R * k;
    if (x < 1.0)
        return biharmonic_series(R, k);
    const double k2 = k * k;
    return 4.0 * pi * ((2.0 - x * x) * std::cos(x) + 2.0 * x * std::sin(x) - 2.0) / (k2 * k2);
}

int oversampled_size(int Mt, double s_min) {
    int n = static_cast<int>(std::ceil(s_min * Mt - 1e-9));
    if (n % 2)
        ++n;
    return n;
}

double oversampling_minimum(Geometry geometry) {
    return 1.0 + (geometry == Geometry::half_space ? std::sqrt(6.0) : std::sqrt(3.0));
}

bool GreensTable::matches(GreensKind k, const GridSpec &grid) const {
    return kind == k && geometry == grid.geometry && Mt == grid.Mt && Lt == grid.Lt;
}

GreensTable precompute_greens(GreensKind kind, const GridSpec &grid, std::size_t memory_budget) {
    const bool half = grid.geometry == Geometry::half_space;
    const int nf = oversampled_size(grid.Mt, oversampling_minimum(grid.geometry));
    const int nfz = half ? 2 * nf : nf;
    const int a = nf / 2 + 1, az = nfz / 2 + 1;
    const auto pd = grid.padded();
    const int b = pd[0] / 2 + 1, bz = pd[2] / 2 + 1;

    const double bytes = 8.0 * (double(a) * a * az + double(b) * b * bz);
    if (bytes > double(memory_budget))
        throw ResourceError(fmt::format("Green's function precomputation needs {:.0f} MiB, budget is {:.0f} MiB",
                                        bytes / (1 << 20), double(memory_budget) / (1 << 20)));

    GreensTable t;
    t.kind = kind;
    t.geometry = grid.geometry;
    t.Mt = grid.Mt;
    t.Lt = grid.Lt;
    t.R = grid.truncation_radius();
    t.oversampled = nf;
    t.dims = {b, b, bz};

    // 1. sample the continuous transform on the oversampled grid
    std::vector<double> fine(std::size_t(a) * a * az);
    const double dk = 2.0 * pi / (nf * grid.h);
    const double dkz = 2.0 * pi / (nfz * grid.h);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < a; ++j)
            for (int k = 0; k < az; ++k) {
                const double kx = i * dk, ky = j * dk, kz = k * dkz;
                fine[(std::size_t(i) * a + j) * az + k] =
                    truncated_greens_hat(kind, t.R, std::sqrt(kx * kx + ky * ky + kz * kz));
            }

    // 2. back to real space
    dct1_3d(fine.data(), a, a, az);
    const double inv_n = 1.0 / (double(nf) * nf * nfz);

    // 3. restrict to the padded grid and transform forward
    t.samples.resize(std::size_t(b) * b * bz);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j)
            for (int k = 0; k < bz; ++k)
                t.samples[(std::size_t(i) * b + j) * bz + k] = inv_n * fine[(std::size_t(i) * a + j) * az + k];
    fine = {};
    dct1_3d(t.samples.data(), b, b, bz);
    return t;
}

void save_greens(const GreensTable &t, const std::filesystem::path &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigurationError("cannot write Green's table to " + path.string());
    os.write(magic, 4);
    write_le<std::uint32_t>(os, format_version);
    write_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.kind));
    write_le<double>(os, t.R);
    write_le<double>(os, t.Lt);
    for (int d : t.dims)
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (double v : t.samples)
        write_le<double>(os, v);
    if (!os)
        throw ConfigurationError("failed writing Green's table to " + path.string());
}

GreensTable load_greens(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigurationError("cannot open Green's table " + path.string());
    char m[4];
    if (!is.read(m, 4) || std::memcmp(m, magic, 4) != 0)
        throw ConfigurationError("not a Green's table file: " + path.string());
    if (read_le<std::uint32_t>(is) != format_version)
        throw ConfigurationError("unsupported Green's table version");
    GreensTable t;
    const auto kind = read_le<std::uint8_t>(is);
    if (kind > 1)
        throw ConfigurationError("unknown Green's table kind");
    t.kind = static_cast<GreensKind>(kind);
    t.R = read_le<double>(is);
    t.Lt = read_le<double>(is);
    for (auto &d : t.dims)
        d = static_cast<int>(read_le<std::uint32_t>(is));
    t.Mt = t.dims[0] - 1;
    t.geometry = t.dims[2] == t.dims[0] ? Geometry::free_space : Geometry::half_space;
    if (t.dims[0] < 2 || t.dims[1] != t.dims[0] || (t.dims[2] != t.dims[0] && t.dims[2] != 2 * t.Mt + 1))
        throw ConfigurationError("inconsistent Green's table dimensions");
    t.oversampled = oversampled_size(t.Mt, oversampling_minimum(t.geometry));
    t.samples.resize(std::size_t(t.dims[0]) * t.dims[1] * t.dims[2]);
    for (auto &v : t.samples)
        v = read_le<double>(is);
    return t;
}

std::filesystem::path greens_cache_path(const std::filesystem::path &dir, GreensKind kind, const GridSpec &grid) {
    return dir / fmt::format("greens-{}-{}-M{}-L{:a}.segt", to_string(kind), to_string(grid.geometry), grid.Mt,
                             grid.Lt);
}

GreensTable cached_greens(GreensKind kind, const GridSpec &grid, const std::filesystem::path &dir,
                          std::size_t memory_budget) {
    if (dir.empty())
        return precompute_greens(kind, grid, memory_budget);
    const auto path = greens_cache_path(dir, kind, grid);
    if (std::filesystem::exists(path)) {
        try {
            GreensTable t = load_greens(path);
            if (t.matches(kind, grid) && t.R == grid.truncation_radius())
                return t;
            spdlog::warn("ignoring stale Green's table {}", path.string());
        } catch (const ConfigurationError &e) {
            spdlog::warn("ignoring unreadable Green's table {}: {}", path.string(), e.what());
        }
    }
    GreensTable t = precompute_greens(kind, grid, memory_budget);
    std::filesystem::create_directories(dir);
    save_greens(t, path);
    return t;
}

} // namespace hse
