#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>

namespace hse::detail {

// FFTW planning is not thread safe.
std::mutex &fftw_planner_mutex();

/// Calls fftw_init_threads once and sets the planner thread count.
void fftw_use_threads(int n);

template <class T>
class FftwArray {
  public:
    FftwArray() = default;
    explicit FftwArray(std::size_t n) : n_(n), p_(static_cast<T *>(fftw_malloc(sizeof(T) * (n ? n : 1)))) {
        if (!p_)
            throw std::bad_alloc();
    }
    ~FftwArray() {
        if (p_)
            fftw_free(p_);
    }
    FftwArray(const FftwArray &) = delete;
    FftwArray &operator=(const FftwArray &) = delete;
    FftwArray(FftwArray &&o) noexcept : n_(o.n_), p_(o.p_) {
        o.p_ = nullptr;
        o.n_ = 0;
    }
    FftwArray &operator=(FftwArray &&o) noexcept {
        std::swap(n_, o.n_);
        std::swap(p_, o.p_);
        return *this;
    }

    T *data() { return p_; }
    const T *data() const { return p_; }
    T &operator[](std::size_t i) { return p_[i]; }
    const T &operator[](std::size_t i) const { return p_[i]; }
    std::size_t size() const { return n_; }

  private:
    std::size_t n_ = 0;
    T *p_ = nullptr;
};

using Complex = std::complex<double>;

inline fftw_complex *as_fftw(Complex *p) { return reinterpret_cast<fftw_complex *>(p); }

class Plan {
  public:
    Plan() = default;
    explicit Plan(fftw_plan p) : p_(p) {}
    ~Plan() { reset(); }
    Plan(const Plan &) = delete;
    Plan &operator=(const Plan &) = delete;
    Plan(Plan &&o) noexcept : p_(o.p_) { o.p_ = nullptr; }
    Plan &operator=(Plan &&o) noexcept {
        std::swap(p_, o.p_);
        return *this;
    }
    void reset() {
        if (p_) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(p_);
            p_ = nullptr;
        }
    }
    void execute() const { fftw_execute(p_); }
    explicit operator bool() const { return p_ != nullptr; }
    fftw_plan get() const { return p_; }

  private:
    fftw_plan p_ = nullptr;
};

} // namespace hse::detail
