#include "hsewald/simd.hpp"

#include <atomic>

#include "hsewald/types.hpp"

namespace hse {

namespace {

std::atomic<SimdMode> g_mode{SimdMode::automatic};

SimdMode resolve(SimdMode m) {
    if (m == SimdMode::automatic)
        return cpu_has_avx2() ? SimdMode::avx2 : SimdMode::scalar;
    return m;
}

} // namespace

void axpy_scalar(double *y, const double *x, double a, int n) {
    for (int i = 0; i < n; ++i)
        y[i] += a * x[i];
}

double dot_scalar(const double *x, const double *y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}

void set_simd_mode(SimdMode mode) {
    if (mode == SimdMode::avx2 && !cpu_has_avx2())
        throw ConfigurationError("AVX2 requested but not supported by this CPU");
    g_mode.store(mode);
}

SimdMode active_simd_mode() { return resolve(g_mode.load()); }

std::string to_string(SimdMode mode) {
    switch (mode) {
    case SimdMode::automatic:
        return "auto";
    case SimdMode::scalar:
        return "scalar";
    case SimdMode::avx2:
        return "avx2";
    }
    return "?";
}

AxpyFn active_axpy() { return active_simd_mode() == SimdMode::avx2 ? axpy_avx2 : axpy_scalar; }
DotFn active_dot() { return active_simd_mode() == SimdMode::avx2 ? dot_avx2 : dot_scalar; }

} // namespace hse
