#include "hsewald/ewald_real.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsewald/parallel.hpp"

namespace hse {

namespace {

constexpr double inv_sqrt_pi = 0.56418958354775628695;

double checked_length(const Vec3 &r) {
    const double n = norm(r);
    if (!(n > 0.0))
        throw SingularityError("zero displacement in a real-space kernel");
    return n;
}

// Scalars shared by every real-space term at one pair distance.
struct Pair {
    double r;
    double inv;
    double erfc_v;
    double gauss; // exp(-xi^2 r^2)
    double c0;    // 2 xi / sqrt(pi)
    double xi2;
};

// exp(x^2) erfc(x) on [0, 10]: degree-7 Taylor polynomials about nodes
// i/64, with derivatives from y' = 2 x y - 2/sqrt(pi).
struct ErfcxTable {
    static constexpr int per_unit = 64;
    static constexpr double x_max = 10.0;
    static constexpr int degree = 7;
    struct alignas(64) Node {
        double c[degree + 1];
    };
    std::vector<Node> nodes;

    ErfcxTable() : nodes(static_cast<std::size_t>(x_max * per_unit) + 1) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x0 = double(i) / per_unit;
            double y[degree + 1];
            y[0] = std::erfc(x0) * std::exp(x0 * x0);
            y[1] = 2.0 * x0 * y[0] - 2.0 * inv_sqrt_pi;
            for (int n = 1; n < degree; ++n)
                y[n + 1] = 2.0 * x0 * y[n] + 2.0 * n * y[n - 1];
            double fact = 1.0;
            for (int k = 0; k <= degree; ++k) {
                if (k > 1)
                    fact *= k;
                nodes[i].c[k] = y[k] / fact;
            }
        }
    }

    double operator()(double x) const {
        const auto i = static_cast<std::size_t>(x * per_unit + 0.5);
        const double d = x - double(i) / per_unit;
        const double *c = nodes[i].c;
        double s = c[degree];
        for (int k = degree - 1; k >= 0; --k)
            s = s * d + c[k];
        return s;
    }
};

const ErfcxTable &erfcx_table() {
    static const ErfcxTable t;
    return t;
}

inline Pair make_pair(double r, double xi) {
    const double x = xi * r;
    const double gauss = std::exp(-x * x);
    const double e = x <= ErfcxTable::x_max ? erfcx_table()(x) * gauss : std::erfc(x);
    return {r, 1.0 / r, e, gauss, 2.0 * xi * inv_sqrt_pi, xi * xi};
}

inline RadialCoeffs screened(const Pair &p) {
    const double inv = p.inv, inv2 = inv * inv;
    const double e = p.erfc_v, g = p.c0 * p.gauss;
    RadialCoeffs k;
    k.value = e * inv;
    k.a = -(e * inv2 * inv + g * inv2);
    k.b = (3.0 * e * inv2 * inv + 3.0 * g * inv2 + 2.0 * p.xi2 * g) * inv2;
    k.c = (-15.0 * e * inv2 * inv2 - 15.0 * g * inv2 * inv - 10.0 * p.xi2 * g * inv -
           4.0 * p.xi2 * p.xi2 * g * p.r) *
          inv2 * inv;
    return k;
}

// Unnormalized real-space contributions; `a` and `b` are the per-source
// vectors (f, (g, q) or g x q).
struct StokesletReal {
    static Vec3 eval(const Vec3 &r, const Pair &p, const Vec3 &f, const Vec3 &) {
        const double c1 = p.c0 * p.gauss + p.erfc_v * p.inv;
        const double c2 = 2.0 * p.c0 * p.gauss;
        const double rf = dot(r, f) * p.inv * p.inv;
        return (c1 - c2) * f + (c1 * rf) * r;
    }
};

struct StressletReal {
    static Vec3 eval(const Vec3 &r, const Pair &p, const Vec3 &g, const Vec3 &q) {
        const double xr2 = p.xi2 * p.r * p.r;
        const double A = -2.0 * p.inv * (3.0 * p.erfc_v * p.inv + p.c0 * (3.0 + 2.0 * xr2) * p.gauss);
        const double B = 2.0 * p.xi2 * p.c0 * p.gauss * p.r;
        const Vec3 rh = p.inv * r;
        const double rg = dot(rh, g), rq = dot(rh, q);
        return (A * rg * rq + B * dot(g, q)) * rh + (B * rq) * g + (B * rg) * q;
    }
};

struct RotletReal {
    static Vec3 eval(const Vec3 &r, const Pair &p, const Vec3 &v, const Vec3 &) {
        const double C = 2.0 * (p.erfc_v * p.inv * p.inv + p.c0 * p.gauss * p.inv);
        return (C * p.inv) * cross(v, r);
    }
};

struct Sources {
    std::vector<Vec3> pos;
    std::vector<Vec3> a;
    std::vector<Vec3> b;
};

Sources combined_sources(const PointSystem &s) {
    const ImageSystem img = s.geometry == Geometry::half_space ? reflect(s) : as_combined(s);
    Sources out;
    out.pos = img.combined_positions;
    const std::size_t n = out.pos.size();
    out.b.assign(n, Vec3{});
    if (s.kind == KernelKind::rotlet) {
        out.a.resize(n);
        for (std::size_t m = 0; m < n; ++m)
            out.a[m] = cross(img.combined_strength[m], img.combined_orientation[m]);
    } else {
        out.a = img.combined_strength;
        if (s.kind == KernelKind::stresslet)
            out.b = img.combined_orientation;
    }
    return out;
}

template <class Term>
void real_loop(const PointSystem &s, const RealSpaceParams &prm, const Targets &t, VelocityResult &res) {
    const bool half = s.geometry == Geometry::half_space;
    const std::size_t n = s.size();
    const double L = s.box_length;
    const Sources src = combined_sources(s);
    std::vector<CorrectionWeights> corr;
    if (half) {
        corr.resize(n);
        for (std::size_t m = 0; m < n; ++m)
            corr[m] = correction_weights(s.kind, s.positions[m], s.strength[m],
                                         s.has_orientation() ? s.orientation[m] : Vec3{});
    }
    const Vec3 lo{0.0, 0.0, half ? -L : 0.0};
    const Vec3 hi{L, L, L};
    const double pref = kernel_prefactor(s.kind);
    const double xi = prm.xi;
    if (prm.rc <= 0.0)
        return;
    const CellList cells(src.pos, prm.rc, lo, hi);

    // source data laid out in slot order so the inner loop reads contiguously
    const auto &order = cells.order();
    const std::size_t ns = order.size();
    std::vector<Vec3> sa(ns), sb(ns);
    std::vector<const CorrectionWeights *> sc(ns, nullptr);
    for (std::size_t k = 0; k < ns; ++k) {
        sa[k] = src.a[order[k]];
        sb[k] = src.b[order[k]];
        if (order[k] >= n)
            sc[k] = &corr[order[k] - n];
    }
    // visit targets cell by cell; each target's sum order is fixed by the list
    std::vector<std::size_t> visit(t.size());
    std::iota(visit.begin(), visit.end(), std::size_t{0});
    {
        std::vector<std::size_t> key(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            key[i] = cells.cell_of(t.points[i]);
        std::stable_sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    }

    parallel_for(t.size(), [&](std::size_t tb, std::size_t te) {
        for (std::size_t vi = tb; vi < te; ++vi) {
            const std::size_t ti = visit[vi];
            const Vec3 x = t.points[ti];
            const auto self = t.self_index[ti];
            Vec3 acc{};
            Vec3 corr_acc{};
            cells.for_each_neighbor_slot(x, [&](std::size_t k, const Vec3 &r, double r2) {
                if (static_cast<std::ptrdiff_t>(order[k]) == self)
                    return;
                if (r2 == 0.0)
                    throw SingularityError("target coincides with a non-self source");
                const Pair p = make_pair(std::sqrt(r2), xi);
                acc += Term::eval(r, p, sa[k], sb[k]);
                if (sc[k])
                    corr_acc += correction_velocity(evaluate_phi(*sc[k], r, screened(p)), x[2]);
            });
            res.real[ti] = pref * (acc + corr_acc);
        }
    });
}

} // namespace

double erfcx(double x) {
    if (std::isnan(x))
        return x;
    if (x < 0.0)
        return 2.0 * std::exp(x * x) - erfcx(-x);
    if (x <= ErfcxTable::x_max)
        return erfcx_table()(x);
    if (x < 26.0)
        return std::erfc(x) * std::exp(x * x);
    // asymptotic series, terms below 1e-17 here
    const double t = 1.0 / (2.0 * x * x);
    return inv_sqrt_pi / x * (1.0 - t * (1.0 - 3.0 * t * (1.0 - 5.0 * t * (1.0 - 7.0 * t))));
}

FDerivs f_derivs(double r, double xi) {
    if (!(r > 0.0))
        throw DomainError("f_derivs requires r > 0");
    if (!(xi > 0.0))
        throw DomainError("f_derivs requires xi > 0");
    const double erf_v = std::erf(xi * r);
    const double c0E = 2.0 * xi * inv_sqrt_pi * std::exp(-xi * xi * r * r);
    const double inv = 1.0 / r, inv2 = inv * inv;
    FDerivs d;
    d.f = erf_v * inv;
    d.d1 = c0E * inv - erf_v * inv2;
    d.d2 = -2.0 * c0E * inv2 - 2.0 * xi * xi * c0E + 2.0 * erf_v * inv2 * inv;
    d.d3 = 2.0 * c0E * inv * (3.0 * inv2 + 2.0 * xi * xi + 2.0 * std::pow(xi, 4) * r * r) - 6.0 * erf_v * inv2 * inv2;
    return d;
}

RadialCoeffs screened_coeffs(double r, double xi) {
    if (!(r > 0.0))
        throw SingularityError("zero displacement in a real-space kernel");
    return screened(make_pair(r, xi));
}

HarmonicDerivs harmonic_real_derivs(const Vec3 &r, double xi) {
    return radial_derivs(r, screened_coeffs(checked_length(r), xi));
}

Mat3 stokeslet_real(const Vec3 &r, double xi) {
    const Pair p = make_pair(checked_length(r), xi);
    Mat3 m{};
    for (int l = 0; l < 3; ++l) {
        Vec3 e{};
        e[l] = 1.0;
        const Vec3 col = StokesletReal::eval(r, p, e, {});
        for (int j = 0; j < 3; ++j)
            m[j][l] = col[j];
    }
    return m;
}

Tensor3 stresslet_real(const Vec3 &r, double xi) {
    const Pair p = make_pair(checked_length(r), xi);
    Tensor3 t{};
    for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
            Vec3 g{}, q{};
            g[l] = 1.0;
            q[m] = 1.0;
            const Vec3 col = StressletReal::eval(r, p, g, q);
            for (int j = 0; j < 3; ++j)
                t[j][l][m] = col[j];
        }
    return t;
}

Mat3 rotlet_real(const Vec3 &r, double xi) {
    const Pair p = make_pair(checked_length(r), xi);
    Mat3 m{};
    for (int l = 0; l < 3; ++l) {
        Vec3 e{};
        e[l] = 1.0;
        const Vec3 col = RotletReal::eval(r, p, e, {});
        for (int j = 0; j < 3; ++j)
            m[j][l] = col[j];
    }
    return m;
}

PhiValue correction_phi_real(KernelKind kind, const Vec3 &y, const Vec3 &strength, const Vec3 &orientation,
                             const Vec3 &x, double xi) {
    const Vec3 rt = x - mirror(y);
    RadialCoeffs k = screened_coeffs(checked_length(rt), xi);
    const double s = kernel_prefactor(kind);
    k.value *= s;
    k.a *= s;
    k.b *= s;
    k.c *= s;
    return evaluate_phi(correction_weights(kind, y, strength, orientation), rt, k);
}

Mat3 self_interaction(KernelKind kind, double xi) {
    if (kind != KernelKind::stokeslet)
        return zero_mat();
    Mat3 m = zero_mat();
    for (int i = 0; i < 3; ++i)
        m[i][i] = -4.0 * xi * inv_sqrt_pi;
    return m;
}

// ---- cell list ------------------------------------------------------------

CellList::CellList(const std::vector<Vec3> &points, double rc, const Vec3 &lo, const Vec3 &hi)
    : rc_(rc), rc2_(rc * rc), lo_(lo) {
    if (!(rc > 0.0))
        throw ParameterError("cell list cutoff must be positive");
    double total = 1.0;
    for (int d = 0; d < 3; ++d) {
        const double ext = hi[d] - lo[d];
        if (!(ext > 0.0))
            throw ParameterError("cell list bounds are empty");
        dims_[d] = std::max(1, static_cast<int>(std::floor(2.0 * ext / rc)));
        total *= dims_[d];
    }
    // keep the table proportional to the point count
    const double limit = 8.0 * static_cast<double>(points.size()) + 27.0;
    if (total > limit) {
        const double shrink = std::cbrt(total / limit);
        for (int d = 0; d < 3; ++d)
            dims_[d] = std::max(1, static_cast<int>(std::floor(dims_[d] / shrink)));
    }
    for (int d = 0; d < 3; ++d)
        edge_[d] = (hi[d] - lo[d]) / dims_[d];

    const std::size_t nc = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    std::vector<std::size_t> cell(points.size());
    start_.assign(nc + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto &p = points[i];
        cell[i] = (static_cast<std::size_t>(cell_coord(p[0], 0)) * dims_[1] + cell_coord(p[1], 1)) * dims_[2] +
                  cell_coord(p[2], 2);
        ++start_[cell[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    order_.resize(points.size());
    sorted_.resize(points.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t s = fill[cell[i]]++;
        order_[s] = i;
        sorted_[s] = points[i];
    }
}

int CellList::cell_coord(double v, int d) const {
    const int c = static_cast<int>(std::floor((v - lo_[d]) / edge_[d]));
    return std::clamp(c, 0, dims_[d] - 1);
}

std::size_t CellList::cell_of(const Vec3 &x) const {
    return (static_cast<std::size_t>(cell_coord(x[0], 0)) * dims_[1] + cell_coord(x[1], 1)) * dims_[2] +
           cell_coord(x[2], 2);
}

std::vector<std::size_t> CellList::neighbors(const Vec3 &x) const {
    std::vector<std::size_t> out;
    for_each_neighbor(x, [&](std::size_t i, const Vec3 &, double) { out.push_back(i); });
    std::sort(out.begin(), out.end());
    return out;
}

CellList build_cell_list(const std::vector<Vec3> &points, double rc, const Vec3 &lo, const Vec3 &hi) {
    return CellList(points, rc, lo, hi);
}

// ---- real-space sum -------------------------------------------------------

void RealSpaceParams::validate() const {
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw ParameterError("Ewald parameter xi must be positive");
    if (!(rc >= 0.0) || !std::isfinite(rc))
        throw ParameterError("cutoff radius must be non-negative");
}

VelocityResult real_space_sum(const PointSystem &system, const RealSpaceParams &params, const Targets &targets) {
    params.validate();
    if (system.geometry == Geometry::half_space)
        for (const auto &x : targets.points)
            if (x[2] < 0.0)
                throw DomainError("half-space target below the wall");
    VelocityResult res;
    res.real.assign(targets.size(), Vec3{});
    res.self.assign(targets.size(), Vec3{});
    switch (system.kind) {
    case KernelKind::stokeslet:
        real_loop<StokesletReal>(system, params, targets, res);
        break;
    case KernelKind::stresslet:
        real_loop<StressletReal>(system, params, targets, res);
        break;
    case KernelKind::rotlet:
        real_loop<RotletReal>(system, params, targets, res);
        break;
    }
    if (system.kind == KernelKind::stokeslet) {
        const Mat3 self = self_interaction(system.kind, params.xi);
        const double pref = kernel_prefactor(system.kind);
        for (std::size_t t = 0; t < targets.size(); ++t)
            if (targets.self_index[t] >= 0)
                res.self[t] = pref * matvec(self, system.strength[targets.self_index[t]]);
    }
    res.velocity.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t)
        res.velocity[t] = res.real[t] + res.self[t];
    return res;
}

} // namespace hse
