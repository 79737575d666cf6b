#include "hsewald/direct.hpp"

#include <atomic>

#include "hsewald/kernels.hpp"
#include "hsewald/parallel.hpp"

namespace hse {

namespace {

std::atomic<int> g_threads{1};

[[noreturn]] void coincident() { throw SingularityError("target coincides with a non-self source"); }

// Unnormalized (appendix convention) kernel contribution of one source.
struct StokesletTerm {
    static Vec3 eval(const Vec3 &r, double r2, const Vec3 &f, const Vec3 &) {
        const double inv = 1.0 / std::sqrt(r2);
        const double inv3 = inv * inv * inv;
        const double rf = dot(r, f) * inv3;
        return {f[0] * inv + r[0] * rf, f[1] * inv + r[1] * rf, f[2] * inv + r[2] * rf};
    }
};

struct StressletTerm {
    static Vec3 eval(const Vec3 &r, double r2, const Vec3 &g, const Vec3 &q) {
        const double inv = 1.0 / std::sqrt(r2);
        const double inv2 = inv * inv;
        const double s = -6.0 * inv2 * inv2 * inv * dot(r, g) * dot(r, q);
        return s * r;
    }
};

// `v` carries g x q, precomputed per source.
struct RotletTerm {
    static Vec3 eval(const Vec3 &r, double r2, const Vec3 &v, const Vec3 &) {
        const double inv = 1.0 / std::sqrt(r2);
        return (2.0 * inv * inv * inv) * cross(v, r);
    }
};

struct SourceView {
    std::vector<Vec3> a; // f, g or g x q
    std::vector<Vec3> b; // q for the stresslet
};

SourceView source_view(const PointSystem &s) {
    SourceView v;
    if (s.kind == KernelKind::rotlet) {
        v.a.resize(s.size());
        for (std::size_t m = 0; m < s.size(); ++m)
            v.a[m] = cross(s.strength[m], s.orientation[m]);
        v.b.assign(s.size(), Vec3{});
    } else {
        v.a = s.strength;
        v.b = s.kind == KernelKind::stresslet ? s.orientation : std::vector<Vec3>(s.size(), Vec3{});
    }
    return v;
}

template <class Term>
void free_loop(const PointSystem &s, const SourceView &src, const Targets &t, std::vector<Vec3> &out) {
    const double pref = kernel_prefactor(s.kind);
    const std::size_t n = s.size();
    parallel_for(t.size(), [&](std::size_t tb, std::size_t te) {
        for (std::size_t ti = tb; ti < te; ++ti) {
            const Vec3 x = t.points[ti];
            const std::ptrdiff_t self = t.self_index[ti];
            Vec3 acc{};
            for (std::size_t m = 0; m < n; ++m) {
                if (static_cast<std::ptrdiff_t>(m) == self)
                    continue;
                const Vec3 r = x - s.positions[m];
                const double r2 = dot(r, r);
                if (r2 == 0.0)
                    coincident();
                acc += Term::eval(r, r2, src.a[m], src.b[m]);
            }
            out[ti] = pref * acc;
        }
    });
}

// Half-space pair terms. Each source carries its direct data, the folded
// image data and the wall-correction weights; `add` accumulates the direct
// and image kernels into acc and phi, grad phi (unnormalized G = 1/r) into
// phi, grad.
struct HalfStokeslet {
    struct Source {
        Vec3 f, f_img, dipole;
        double charge;
    };
    static Source make(const Vec3 &y, const Vec3 &f, const Vec3 &) {
        const Vec3 fI = mirror(f);
        return {f, -1.0 * fI, -2.0 * y[2] * fI, -2.0 * f[2]};
    }
    static Vec3 direct(const Vec3 &r, double inv, const Source &s) {
        const double rf = dot(r, s.f) * inv * inv * inv;
        return inv * s.f + rf * r;
    }
    static void add(const Vec3 &rt, double inv, const Source &s, Vec3 &acc, double &phi, Vec3 &grad) {
        const double inv3 = inv * inv * inv;
        acc += inv * s.f_img + (dot(rt, s.f_img) * inv3) * rt;
        const double rd = dot(rt, s.dipole);
        phi += s.charge * inv - inv3 * rd;
        grad += (3.0 * inv3 * inv * inv * rd - s.charge * inv3) * rt - inv3 * s.dipole;
    }
};

struct HalfStresslet {
    struct Source {
        Vec3 g, q, g_img, q_img;
        double dz, quad; // dipole (0, 0, dz); quadrupole quad * gI qI
    };
    static Source make(const Vec3 &y, const Vec3 &g, const Vec3 &q) {
        const Vec3 gI = mirror(g), qI = mirror(q);
        return {g, q, gI, qI, 4.0 * dot(gI, qI), -4.0 * y[2]};
    }
    static Vec3 direct(const Vec3 &r, double inv, const Source &s) {
        const double inv2 = inv * inv;
        return (-6.0 * inv2 * inv2 * inv * dot(r, s.g) * dot(r, s.q)) * r;
    }
    static void add(const Vec3 &rt, double inv, const Source &s, Vec3 &acc, double &phi, Vec3 &grad) {
        const double inv2 = inv * inv;
        const double a = -inv2 * inv, b = -3.0 * a * inv2, c = -5.0 * b * inv2;
        const double rg = dot(rt, s.g_img), rq = dot(rt, s.q_img);
        // image kernel with the folded strength -gI
        acc += (6.0 * inv2 * inv2 * inv * rg * rq) * rt;
        const double rd = rt[2] * s.dz;
        const double tr = s.quad * dot(s.g_img, s.q_img);
        const double rQr = s.quad * rg * rq;
        phi += a * rd + a * tr + b * rQr;
        grad += (b * rd + b * tr + c * rQr) * rt + (b * s.quad) * (rq * s.g_img + rg * s.q_img);
        grad[2] += a * s.dz;
    }
};

struct HalfRotlet {
    struct Source {
        Vec3 v, v_img, dipole; // g x q, folded image g x q
    };
    static Source make(const Vec3 &, const Vec3 &g, const Vec3 &q) {
        const Vec3 gI = mirror(g), qI = mirror(q);
        return {cross(g, q), cross(-1.0 * gI, qI), 4.0 * (q[2] * gI - g[2] * qI)};
    }
    static Vec3 direct(const Vec3 &r, double inv, const Source &s) {
        return (2.0 * inv * inv * inv) * cross(s.v, r);
    }
    static void add(const Vec3 &rt, double inv, const Source &s, Vec3 &acc, double &phi, Vec3 &grad) {
        const double inv3 = inv * inv * inv;
        acc += (2.0 * inv3) * cross(s.v_img, rt);
        const double rd = dot(rt, s.dipole);
        phi -= inv3 * rd;
        grad += (3.0 * inv3 * inv * inv * rd) * rt - inv3 * s.dipole;
    }
};

template <class Term>
void half_loop(const PointSystem &s, const Targets &t, std::vector<Vec3> &out) {
    const double pref = kernel_prefactor(s.kind);
    const std::size_t n = s.size();
    std::vector<typename Term::Source> src(n);
    for (std::size_t m = 0; m < n; ++m)
        src[m] = Term::make(s.positions[m], s.strength[m], s.has_orientation() ? s.orientation[m] : Vec3{});
    parallel_for(t.size(), [&](std::size_t tb, std::size_t te) {
        for (std::size_t ti = tb; ti < te; ++ti) {
            const Vec3 x = t.points[ti];
            const std::ptrdiff_t self = t.self_index[ti];
            Vec3 acc{}, grad{};
            double phi = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const Vec3 y = s.positions[m];
                if (static_cast<std::ptrdiff_t>(m) != self) {
                    const Vec3 r = x - y;
                    const double r2 = dot(r, r);
                    if (r2 == 0.0)
                        coincident();
                    acc += Term::direct(r, 1.0 / std::sqrt(r2), src[m]);
                }
                const Vec3 rt{x[0] - y[0], x[1] - y[1], x[2] + y[2]};
                const double rt2 = dot(rt, rt);
                if (rt2 == 0.0)
                    throw SingularityError("target coincides with an image location");
                Term::add(rt, 1.0 / std::sqrt(rt2), src[m], acc, phi, grad);
            }
            out[ti] = pref * (acc + Vec3{-x[2] * grad[0], -x[2] * grad[1], -x[2] * grad[2] + phi});
        }
    });
}

} // namespace

int num_threads() { return g_threads.load(); }
void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

VelocityResult direct_sum_free(const PointSystem &system, const Targets &targets) {
    VelocityResult res;
    res.velocity.assign(targets.size(), Vec3{});
    const SourceView src = source_view(system);
    switch (system.kind) {
    case KernelKind::stokeslet:
        free_loop<StokesletTerm>(system, src, targets, res.velocity);
        break;
    case KernelKind::stresslet:
        free_loop<StressletTerm>(system, src, targets, res.velocity);
        break;
    case KernelKind::rotlet:
        free_loop<RotletTerm>(system, src, targets, res.velocity);
        break;
    }
    return res;
}

VelocityResult direct_sum_half(const PointSystem &system, const Targets &targets) {
    if (system.geometry != Geometry::half_space)
        throw UsageError("direct_sum_half requires a half-space system");
    for (const auto &x : targets.points)
        if (x[2] < 0.0)
            throw DomainError("half-space target below the wall");

    VelocityResult res;
    res.velocity.assign(targets.size(), Vec3{});
    switch (system.kind) {
    case KernelKind::stokeslet:
        half_loop<HalfStokeslet>(system, targets, res.velocity);
        break;
    case KernelKind::stresslet:
        half_loop<HalfStresslet>(system, targets, res.velocity);
        break;
    case KernelKind::rotlet:
        half_loop<HalfRotlet>(system, targets, res.velocity);
        break;
    }
    return res;
}

VelocityResult direct_sum(const PointSystem &system, const Targets &targets) {
    return system.geometry == Geometry::half_space ? direct_sum_half(system, targets)
                                                   : direct_sum_free(system, targets);
}

} // namespace hse
