#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hse {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
// T[i][j][k]
using Tensor3 = std::array<Mat3, 3>;

inline constexpr double pi = std::numbers::pi;

enum class KernelKind { stokeslet, stresslet, rotlet };
enum class Geometry { free_space, half_space };

// ---- errors ---------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct UsageError : Error {
    using Error::Error;
};
struct SingularityError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ResourceError : Error {
    using Error::Error;
};
struct ConfigurationError : Error {
    using Error::Error;
};
struct InfeasibleError : Error {
    using Error::Error;
};

// ---- small vector algebra -------------------------------------------------

inline constexpr Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline constexpr Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline constexpr Vec3 operator-(const Vec3 &a) { return {-a[0], -a[1], -a[2]}; }
inline constexpr Vec3 operator*(double s, const Vec3 &a) { return {s * a[0], s * a[1], s * a[2]}; }
inline constexpr Vec3 operator*(const Vec3 &a, double s) { return s * a; }
inline constexpr Vec3 &operator+=(Vec3 &a, const Vec3 &b) {
    a[0] += b[0];
    a[1] += b[1];
    a[2] += b[2];
    return a;
}
inline constexpr Vec3 &operator-=(Vec3 &a, const Vec3 &b) {
    a[0] -= b[0];
    a[1] -= b[1];
    a[2] -= b[2];
    return a;
}

inline constexpr double dot(const Vec3 &a, const Vec3 &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

inline constexpr Vec3 matvec(const Mat3 &m, const Vec3 &v) { return {dot(m[0], v), dot(m[1], v), dot(m[2], v)}; }

/// Mirror map diag(1,1,-1) about the wall x3 = 0.
inline constexpr Vec3 mirror(const Vec3 &a) { return {a[0], a[1], -a[2]}; }

inline constexpr Mat3 zero_mat() { return {}; }
inline constexpr Mat3 identity_mat() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline constexpr double levi_civita(int i, int j, int k) {
    return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

// ---- enum helpers ---------------------------------------------------------

std::string_view to_string(KernelKind k);
std::string_view to_string(Geometry g);
KernelKind parse_kernel(std::string_view s);
Geometry parse_geometry(std::string_view s);

/// Normalization applied once at assembly: 1/(8 pi) for stokeslet and
/// stresslet, 1/(4 pi) for rotlet.
inline constexpr double kernel_prefactor(KernelKind k) {
    return k == KernelKind::rotlet ? 1.0 / (4.0 * pi) : 1.0 / (8.0 * pi);
}

} // namespace hse
