#pragma once

#include <string>

namespace hse {

// Row kernels of the spread and gather loops. The AVX2 variants are picked at
// runtime when the CPU supports AVX2 and FMA.

enum class SimdMode { automatic, scalar, avx2 };

/// y[i] += a * x[i]
using AxpyFn = void (*)(double *y, const double *x, double a, int n);
/// sum x[i] * y[i]
using DotFn = double (*)(const double *x, const double *y, int n);

void axpy_scalar(double *y, const double *x, double a, int n);
double dot_scalar(const double *x, const double *y, int n);
void axpy_avx2(double *y, const double *x, double a, int n);
double dot_avx2(const double *x, const double *y, int n);

bool cpu_has_avx2();

/// Selects the active variant; requesting avx2 on a CPU without it throws
/// ConfigurationError.
void set_simd_mode(SimdMode mode);
SimdMode active_simd_mode();
std::string to_string(SimdMode mode);

AxpyFn active_axpy();
DotFn active_dot();

} // namespace hse
