#include <doctest.h>

#include <functional>
#include <random>

#include "hsewald/direct.hpp"
#include "hsewald/kernels.hpp"
#include "test_util.hpp"

using namespace hse;
using namespace hse::testing;

TEST_CASE("stokeslet examples") {
    const Mat3 s = stokeslet({1, 0, 0});
    CHECK(8 * pi * s[0][0] == doctest::Approx(2.0));
    CHECK(8 * pi * s[1][1] == doctest::Approx(1.0));
    CHECK(8 * pi * s[2][2] == doctest::Approx(1.0));
    CHECK(s[0][1] == 0.0);

    const Vec3 u = 8 * pi * matvec(stokeslet({0, 0, 2}), {1, 0, 0});
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);

    const Vec3 r{0.3, -1.2, 0.7};
    const Mat3 s1 = stokeslet(r);
    const Mat3 s2 = stokeslet(2.0 * r);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(s2[i][j] == doctest::Approx(s1[i][j] / 2).epsilon(1e-14));

    CHECK_THROWS_AS(stokeslet({0, 0, 0}), SingularityError);
}

TEST_CASE("stresslet examples") {
    const Vec3 u = 8 * pi * stresslet_apply({1, 0, 0}, {1, 0, 0}, {1, 0, 0});
    CHECK(u[0] == doctest::Approx(-6.0));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);
    CHECK(norm(stresslet_apply({1, 0, 0}, {0, 1, 0}, {0, 0, 1})) == 0.0);

    const Vec3 r{0.2, -0.4, 0.9}, g{0.3, 0.1, -0.7}, q{-0.5, 0.8, 0.2};
    CHECK(max_abs_diff(stresslet_apply(r, g, q), stresslet_apply(r, q, g)) < 1e-15);
    CHECK_THROWS_AS(stresslet_apply({0, 0, 0}, g, q), SingularityError);
}

TEST_CASE("rotlet examples") {
    const Mat3 w = rotlet({0, 0, 1});
    const Mat3 expect{{{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(4 * pi * w[i][j] == doctest::Approx(expect[i][j]));
    CHECK(norm(rotlet_apply({0.3, 0.2, 0.1}, {1, 2, 3}, {2, 4, 6})) == 0.0);
    const Mat3 a = rotlet({1, 1, 1}), b = rotlet({-1, -1, -1});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(a[i][j] == -b[i][j]);
    // rotlet_apply agrees with the tensor form 2 W (g x q)
    const Vec3 r{0.4, -0.1, 0.6}, g{0.1, 0.5, -0.3}, q{0.7, -0.2, 0.4};
    CHECK(max_abs_diff(rotlet_apply(r, g, q), 2.0 * matvec(rotlet(r), cross(g, q))) < 1e-14);
}

TEST_CASE("kernel tensor symmetries and homogeneity") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int n = 0; n < 1000; ++n) {
        const Vec3 r{U(rng), U(rng), U(rng)};
        const Mat3 s = stokeslet(r);
        const Mat3 w = rotlet(r);
        const Tensor3 t = stresslet(r);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                REQUIRE(s[i][j] == s[j][i]);
                REQUIRE(w[i][j] == -w[j][i]);
                for (int k = 0; k < 3; ++k) {
                    REQUIRE(t[i][j][k] == doctest::Approx(t[j][i][k]).epsilon(1e-15));
                    REQUIRE(t[i][j][k] == doctest::Approx(t[k][j][i]).epsilon(1e-15));
                    REQUIRE(t[i][j][k] == doctest::Approx(t[i][k][j]).epsilon(1e-15));
                }
            }
        const double alpha = 0.5 + std::abs(U(rng));
        const Mat3 s2 = stokeslet(alpha * r), w2 = rotlet(alpha * r);
        const Tensor3 t2 = stresslet(alpha * r);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                REQUIRE(s2[i][j] == doctest::Approx(s[i][j] / alpha).epsilon(1e-13));
                REQUIRE(w2[i][j] == doctest::Approx(w[i][j] / (alpha * alpha)).epsilon(1e-13));
                for (int k = 0; k < 3; ++k)
                    REQUIRE(t2[i][j][k] == doctest::Approx(t[i][j][k] / (alpha * alpha)).epsilon(1e-13));
            }
    }
}

TEST_CASE("harmonic derivatives") {
    CHECK(harmonic_derivs({2, 0, 0}).G == doctest::Approx(1.0 / (8 * pi)));
    const auto d = harmonic_derivs({1, 0, 0});
    CHECK(d.grad[0] == doctest::Approx(-1.0 / (4 * pi)));
    CHECK(d.grad[1] == 0.0);
    CHECK_THROWS_AS(harmonic_derivs({0, 0, 0}), SingularityError);

    // hess vs central differences of grad
    const Vec3 r{0.4, -0.3, 0.8};
    const Mat3 fd = fd_jacobian([](const Vec3 &p) { return harmonic_derivs(p).grad; }, r, 1e-5);
    CHECK(rel_diff(harmonic_derivs(r).hess, fd) < 1e-8);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int n = 0; n < 200; ++n) {
        const Vec3 p{U(rng), U(rng), U(rng)};
        if (norm(p) < 0.05)
            continue;
        const auto h = harmonic_derivs(p);
        const double tr = h.hess[0][0] + h.hess[1][1] + h.hess[2][2];
        REQUIRE(std::abs(tr) <= 1e-12 * frob(h.hess));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                REQUIRE(h.hess[i][j] == doctest::Approx(h.hess[j][i]).epsilon(1e-14));
                for (int k = 0; k < 3; ++k) {
                    REQUIRE(h.third[i][j][k] == doctest::Approx(h.third[j][i][k]).epsilon(1e-14));
                    REQUIRE(h.third[i][j][k] == doctest::Approx(h.third[i][k][j]).epsilon(1e-14));
                }
            }
    }
}

namespace {

// Literal transcription of the wall-correction potentials, with G and its
// derivatives written out independently of the library's radial machinery.
// Potentials come out in units of the kernel prefactor.
double G_lit(const Vec3 &r) { return 1.0 / norm(r); }
Vec3 dG_lit(const Vec3 &r) {
    const double n = norm(r);
    return (-1.0 / (n * n * n)) * r;
}
Mat3 ddG_lit(const Vec3 &r) {
    const double n = norm(r);
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m[i][j] = (3 * r[i] * r[j] - (i == j ? n * n : 0.0)) / std::pow(n, 5);
    return m;
}

double phi_literal(KernelKind kind, const Vec3 &y, const Vec3 &a, const Vec3 &b, const Vec3 &x) {
    const Vec3 yI = mirror(y);
    const Vec3 r = x - yI;
    const double pref = kernel_prefactor(kind);
    switch (kind) {
    case KernelKind::stokeslet:
        return pref * 2 * (-a[2] * G_lit(r) - y[2] * dot(dG_lit(r), mirror(a)));
    case KernelKind::stresslet: {
        const Vec3 gI = mirror(a), qI = mirror(b);
        return pref * 2 * (2 * dot(gI, qI) * dG_lit(r)[2] - 2 * y[2] * dot(matvec(ddG_lit(r), gI), qI));
    }
    case KernelKind::rotlet:
        return pref * 2 * dot(dG_lit(r), 2.0 * (b[2] * mirror(a) - a[2] * mirror(b)));
    }
    return 0;
}

} // namespace

TEST_CASE("correction potentials") {
    SUBCASE("stokeslet with f3 = 0 and y3 = 0 vanishes") {
        const auto p = correction_phi(KernelKind::stokeslet, {0.3, 0.3, 0.0}, {1, 2, 0}, {}, {0.5, 0.1, 0.4});
        CHECK(p.phi == 0.0);
    }
    SUBCASE("rotlet with in-plane g and q vanishes") {
        const auto p =
            correction_phi(KernelKind::rotlet, {0.3, 0.3, 0.2}, {1, 2, 0}, {0.5, -1, 0}, {0.5, 0.1, 0.4});
        CHECK(p.phi == 0.0);
        CHECK(norm(p.grad) == 0.0);
    }
    SUBCASE("all kinds match the literal formula and its finite-difference gradient") {
        const Vec3 x{0.2, 0.1, 0.5}, y{0.6, 0.4, 0.3};
        const Vec3 a{0.7, -0.4, 0.9}, b{-0.2, 0.5, 0.35};
        for (auto kind : {KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet}) {
            const auto p = correction_phi(kind, y, a, b, x);
            const double lit = phi_literal(kind, y, a, b, x);
            CHECK(std::abs(p.phi - lit) <= 1e-10 * std::abs(lit));
            const Vec3 fd =
                fd_gradient([&](const Vec3 &z) { return phi_literal(kind, y, a, b, z); }, x, 1e-5);
            CHECK(rel_diff(p.grad, fd) < 1e-8);
        }
    }
    CHECK_THROWS_AS(correction_phi(KernelKind::stokeslet, {0.1, 0.1, 0.2}, {1, 1, 1}, {}, {0.1, 0.1, -0.2}),
                    SingularityError);
}

namespace {

// Second, independent implementation of the free-space sum built on the
// public tensor evaluators.
std::vector<Vec3> naive_free(const PointSystem &s, const Targets &t) {
    std::vector<Vec3> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t m = 0; m < s.size(); ++m) {
            if (t.self_index[i] == static_cast<std::ptrdiff_t>(m))
                continue;
            const Vec3 r = t.points[i] - s.positions[m];
            if (s.kind == KernelKind::stokeslet)
                out[i] += matvec(stokeslet(r), s.strength[m]);
            else if (s.kind == KernelKind::stresslet) {
                const Tensor3 T = stresslet(r);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c)
                            out[i][a] += T[a][b][c] * s.strength[m][b] * s.orientation[m][c];
            } else
                out[i] += 2.0 * matvec(rotlet(r), cross(s.strength[m], s.orientation[m]));
        }
    return out;
}

} // namespace

TEST_CASE("free-space direct sum") {
    SUBCASE("single term") {
        PointSystem s;
        s.box_length = 1;
        s.positions = {{0.2, 0.3, 0.4}};
        s.strength = {{1, -2, 0.5}};
        const auto t = Targets::at_points({{0.7, 0.1, 0.9}});
        const auto u = direct_sum_free(s, t);
        CHECK(max_abs_diff(u.velocity[0], matvec(stokeslet(t.points[0] - s.positions[0]), s.strength[0])) <
              1e-16);
    }
    SUBCASE("symmetric opposite pair cancels") {
        PointSystem s;
        s.box_length = 2;
        s.positions = {{0.5, 0.5, 0.5}, {1.5, 1.5, 1.5}};
        s.strength = {{0.3, 0.2, -0.7}, {-0.3, -0.2, 0.7}};
        const auto u = direct_sum_free(s, Targets::at_points({{1, 1, 1}}));
        CHECK(norm(u.velocity[0]) < 1e-16);
    }
    SUBCASE("agrees with an independent naive loop") {
        for (auto kind : {KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet}) {
            const auto s = generate_system(100, 1.0, kind, Geometry::free_space, 17);
            const auto t = Targets::at_sources(s);
            CHECK(rel_rms(direct_sum_free(s, t).velocity, naive_free(s, t)) < 1e-14);
        }
    }
}

TEST_CASE("half-space direct sum") {
    SUBCASE("single stokeslet obeys no-slip") {
        PointSystem s;
        s.geometry = Geometry::half_space;
        s.box_length = 1;
        s.positions = {{0.5, 0.5, 0.5}};
        s.strength = {{1, 2, 3}};
        const auto u = direct_sum_half(s, Targets::at_points({{0.1, 0.9, 0.0}}));
        CHECK(norm(u.velocity[0]) <= 1e-12);
    }
    SUBCASE("a pair lifted away from the wall approaches the free-space value") {
        for (auto kind : {KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet}) {
            PointSystem s;
            s.kind = kind;
            s.geometry = Geometry::half_space;
            s.box_length = 1;
            s.strength = {{0.3, -0.6, 0.8}};
            if (kind != KernelKind::stokeslet)
                s.orientation = {{0.5, 0.4, -0.2}};
            double prev = 1e300;
            for (double h : {10.0, 100.0, 1000.0}) {
                s.positions = {{0.5, 0.5, h}};
                PointSystem f = s;
                f.geometry = Geometry::free_space;
                const auto t = Targets::at_points({{0.9, 0.2, h + 0.3}});
                const Vec3 uh = direct_sum_half(s, t).velocity[0];
                const Vec3 uf = direct_sum_free(f, t).velocity[0];
                const double rel = norm(uh - uf) / norm(uf);
                CHECK(rel < prev);
                prev = rel;
            }
            CHECK(prev < 1e-3);
        }
    }
    SUBCASE("velocity is divergence free off the wall") {
        for (auto kind : {KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet}) {
            const auto s = generate_system(20, 1.0, kind, Geometry::half_space, 23);
            const Vec3 x{0.37, 0.61, 1.6};
            auto field = [&](const Vec3 &p) { return direct_sum_half(s, Targets::at_points({p})).velocity[0]; };
            const Mat3 J = fd_jacobian(field, x, 1e-4);
            CHECK(std::abs(J[0][0] + J[1][1] + J[2][2]) <= 1e-6);
        }
    }
}

TEST_CASE("no-slip holds for random half-space systems") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (auto kind : {KernelKind::stokeslet, KernelKind::stresslet, KernelKind::rotlet}) {
        const auto s = generate_system(50, 1.0, kind, Geometry::half_space, 31);
        std::vector<Vec3> wall, interior;
        for (int i = 0; i < 20; ++i) {
            wall.push_back({U(rng), U(rng), 0.0});
            interior.push_back({U(rng), U(rng), U(rng)});
        }
        const auto uw = direct_sum_half(s, Targets::at_points(wall));
        const auto ui = direct_sum_half(s, Targets::at_points(interior));
        const double ref = rms_norm(ui.velocity);
        for (const auto &u : uw.velocity)
            CHECK(norm(u) <= 1e-12 * ref);
    }
}

TEST_CASE("direct sum errors") {
    PointSystem s;
    s.box_length = 1;
    s.positions = {{0.2, 0.2, 0.2}, {0.4, 0.4, 0.4}};
    s.strength = {{1, 0, 0}, {0, 1, 0}};
    // self is skipped by index ...
    CHECK_NOTHROW(direct_sum_free(s, Targets::at_sources(s)));
    // ... but a coincident non-self source is a singularity
    CHECK_THROWS_AS(direct_sum_free(s, Targets::at_points({{0.2, 0.2, 0.2}})), SingularityError);
    CHECK_THROWS_AS(direct_sum_half(s, Targets::at_sources(s)), UsageError);
    s.geometry = Geometry::half_space;
    CHECK_THROWS_AS(direct_sum_half(s, Targets::at_points({{0.1, 0.1, -0.1}})), DomainError);
}
