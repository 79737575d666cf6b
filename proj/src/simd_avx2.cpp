#include "hsewald/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace hse {

#if defined(__AVX2__) && defined(__FMA__)

void axpy_avx2(double *y, const double *x, double a, int n) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

double dot_avx2(const double *x, const double *y, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i)
        s += x[i] * y[i];
    return s;
}

#else

void axpy_avx2(double *y, const double *x, double a, int n) { axpy_scalar(y, x, a, n); }
double dot_avx2(const double *x, const double *y, int n) { return dot_scalar(x, y, n); }

#endif

} // namespace hse
