#pragma once

#include <cmath>
#include <vector>

#include "hsewald/kernels.hpp"
#include "hsewald/system.hpp"

namespace hse {

// Real-space (short-range) half of the Ewald split. Kernels here follow the
// unnormalized convention (8 pi S = I/r + r r/r^3 and so on); the physical
// prefactor is applied once when a sum is assembled.

/// Scaled complementary error function exp(x^2) erfc(x).
double erfcx(double x);

/// f(r) = erf(xi r)/r and its first three radial derivatives.
struct FDerivs {
    double f = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

FDerivs f_derivs(double r, double xi);

/// Radial coefficients of erfc(xi r)/r (see RadialCoeffs).
RadialCoeffs screened_coeffs(double r, double xi);

/// Derivatives of 1/r - f(r) = erfc(xi r)/r up to third order.
HarmonicDerivs harmonic_real_derivs(const Vec3 &r, double xi);

Mat3 stokeslet_real(const Vec3 &r, double xi);
Tensor3 stresslet_real(const Vec3 &r, double xi);
/// Carries the factor 2 of the rotlet sum: u = W^R (g x q).
Mat3 rotlet_real(const Vec3 &r, double xi);

/// Screened wall correction, physically normalized like correction_phi.
PhiValue correction_phi_real(KernelKind kind, const Vec3 &y, const Vec3 &strength, const Vec3 &orientation,
                             const Vec3 &x, double xi);

/// -4 xi/sqrt(pi) I for the stokeslet, zero otherwise.
Mat3 self_interaction(KernelKind kind, double xi);

// Uniform-grid cell list over an axis-aligned box with cells of edge about
// r_c / 2. A query walks only the cell columns that meet the ball of radius r_c.
class CellList {
  public:
    CellList(const std::vector<Vec3> &points, double rc, const Vec3 &lo, const Vec3 &hi);

    double cutoff() const { return rc_; }
    std::array<int, 3> dims() const { return dims_; }
    std::size_t num_cells() const { return start_.size() - 1; }

    /// Calls fn(index, r, r2) for every point with |x - p| <= r_c, with r = x - p.
    template <class Fn>
    void for_each_neighbor(const Vec3 &x, Fn &&fn) const;

    /// Same walk, but passes the storage slot; order()[slot] is the index.
    template <class Fn>
    void for_each_neighbor_slot(const Vec3 &x, Fn &&fn) const;

    /// Sorted indices of the points within r_c of x.
    std::vector<std::size_t> neighbors(const Vec3 &x) const;

    /// Point index stored in each slot; slots are grouped by cell.
    const std::vector<std::size_t> &order() const { return order_; }
    /// Linear index of the cell containing x (clamped to the box).
    std::size_t cell_of(const Vec3 &x) const;

  private:
    int cell_coord(double v, int d) const;

    double rc_;
    double rc2_;
    Vec3 lo_;
    Vec3 edge_;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<std::size_t> start_;
    std::vector<std::size_t> order_;
    std::vector<Vec3> sorted_;
};

CellList build_cell_list(const std::vector<Vec3> &points, double rc, const Vec3 &lo, const Vec3 &hi);

struct RealSpaceParams {
    double xi = 0.0;
    double rc = 0.0;

    void validate() const;
};

/// Real-space sum plus self term at the targets. In the result, `real` holds
/// the pair sum, `self` the self term and `velocity` their total.
VelocityResult real_space_sum(const PointSystem &system, const RealSpaceParams &params, const Targets &targets);

// ---- implementation -------------------------------------------------------

template <class Fn>
void CellList::for_each_neighbor(const Vec3 &x, Fn &&fn) const {
    for_each_neighbor_slot(x, [&](std::size_t s, const Vec3 &r, double r2) { fn(order_[s], r, r2); });
}

template <class Fn>
void CellList::for_each_neighbor_slot(const Vec3 &x, Fn &&fn) const {
    // distance from x to the slab of cell c along axis d; end cells extend to infinity
    auto gap = [&](int c, int d) {
        const double a = lo_[d] + c * edge_[d], b = a + edge_[d];
        if (c > 0 && x[d] < a)
            return a - x[d];
        if (c < dims_[d] - 1 && x[d] > b)
            return x[d] - b;
        return 0.0;
    };
    const int i0 = cell_coord(x[0] - rc_, 0), i1 = cell_coord(x[0] + rc_, 0);
    const int j0 = cell_coord(x[1] - rc_, 1), j1 = cell_coord(x[1] + rc_, 1);
    for (int i = i0; i <= i1; ++i) {
        const double gx = gap(i, 0);
        for (int j = j0; j <= j1; ++j) {
            const double gy = gap(j, 1);
            const double rest = rc2_ - gx * gx - gy * gy;
            if (rest < 0.0)
                continue;
            const double rz = std::sqrt(rest);
            const std::size_t row = (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2];
            const std::size_t c0 = row + cell_coord(x[2] - rz, 2);
            const std::size_t c1 = row + cell_coord(x[2] + rz, 2);
            // cells along z are contiguous in the sorted arrays
            for (std::size_t s = start_[c0]; s < start_[c1 + 1]; ++s) {
                const Vec3 r = x - sorted_[s];
                const double r2 = dot(r, r);
                if (r2 <= rc2_)
                    fn(s, r, r2);
            }
        }
    }
}

} // namespace hse
