#pragma once

// Shared helpers for the test suites: norms, relative errors and central
// finite-difference oracles.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hsewald/types.hpp"

namespace hse::testing {

inline double max_abs_diff(const Vec3 &a, const Vec3 &b) {
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

inline double frob(const Mat3 &m) {
    double s = 0;
    for (const auto &row : m)
        for (double v : row)
            s += v * v;
    return std::sqrt(s);
}

inline double frob(const Tensor3 &t) {
    double s = 0;
    for (const auto &m : t)
        s += frob(m) * frob(m);
    return std::sqrt(s);
}

inline double rel_diff(const Vec3 &a, const Vec3 &b) { return norm(a - b) / std::max(norm(b), 1e-300); }

inline double rel_diff(const Mat3 &a, const Mat3 &b) {
    Mat3 d{};
    for (int i = 0; i < 3; ++i)
        d[i] = a[i] - b[i];
    return frob(d) / std::max(frob(b), 1e-300);
}

inline double rel_diff(const Tensor3 &a, const Tensor3 &b) {
    double num = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                num += (a[i][j][k] - b[i][j][k]) * (a[i][j][k] - b[i][j][k]);
    return std::sqrt(num) / std::max(frob(b), 1e-300);
}

inline double rms_norm(const std::vector<Vec3> &v) {
    double s = 0;
    for (const auto &x : v)
        s += dot(x, x);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double rel_rms(const std::vector<Vec3> &a, const std::vector<Vec3> &ref) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 d = a[i] - ref[i];
        num += dot(d, d);
        den += dot(ref[i], ref[i]);
    }
    return std::sqrt(num / den);
}

template <class F>
double fd_derivative(F &&f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

template <class F>
Vec3 fd_gradient(F &&f, const Vec3 &x, double h) {
    Vec3 g{};
    for (int d = 0; d < 3; ++d) {
        Vec3 p = x, m = x;
        p[d] += h;
        m[d] -= h;
        g[d] = (f(p) - f(m)) / (2 * h);
    }
    return g;
}

/// J[i][d] = d f_i / d x_d
template <class F>
Mat3 fd_jacobian(F &&f, const Vec3 &x, double h) {
    Mat3 J{};
    for (int d = 0; d < 3; ++d) {
        Vec3 p = x, m = x;
        p[d] += h;
        m[d] -= h;
        const Vec3 fp = f(p), fm = f(m);
        for (int i = 0; i < 3; ++i)
            J[i][d] = (fp[i] - fm[i]) / (2 * h);
    }
    return J;
}

/// T[i][j][d] = d M_ij / d x_d
template <class F>
Tensor3 fd_jacobian_mat(F &&f, const Vec3 &x, double h) {
    Tensor3 T{};
    for (int d = 0; d < 3; ++d) {
        Vec3 p = x, m = x;
        p[d] += h;
        m[d] -= h;
        const Mat3 fp = f(p), fm = f(m);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                T[i][j][d] = (fp[i][j] - fm[i][j]) / (2 * h);
    }
    return T;
}

} // namespace hse::testing
