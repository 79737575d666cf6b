#pragma once

#include "hsewald/system.hpp"
#include "hsewald/types.hpp"

namespace hse {

// Physically normalized free-space kernels: 1/(8 pi) on S and T, 1/(4 pi) on
// W and G. All evaluators throw SingularityError on r = 0.

Mat3 stokeslet(const Vec3 &r);
Tensor3 stresslet(const Vec3 &r);
Mat3 rotlet(const Vec3 &r);

/// T : (g (x) q)
Vec3 stresslet_apply(const Vec3 &r, const Vec3 &g, const Vec3 &q);
/// 2 W (g x q)
Vec3 rotlet_apply(const Vec3 &r, const Vec3 &g, const Vec3 &q);

struct HarmonicDerivs {
    double G = 0.0;
    Vec3 grad{};
    Mat3 hess{};
    Tensor3 third{};
};

// A radial function F(|r|) has derivatives
//   dF   = a r
//   ddF  = a I + b r r
//   dddF = b (I r + perms) + c r r r
// so G, a, b, c determine everything up to third order.
struct RadialCoeffs {
    double value = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

HarmonicDerivs radial_derivs(const Vec3 &r, const RadialCoeffs &coeffs);

/// Coefficients of 1/|r| (no 4 pi).
RadialCoeffs coulomb_coeffs(double r);

/// Derivatives of G = 1/(4 pi |r|).
HarmonicDerivs harmonic_derivs(const Vec3 &r);

// The harmonic wall correction of one source is a point charge, dipole and
// quadrupole placed at the image location y^I:
//   phi = charge G + dipole . grad G + quad : grad grad G
struct CorrectionWeights {
    double charge = 0.0;
    Vec3 dipole{};
    Mat3 quad{};
    bool has_quad = false;
};

/// Weights from the original (unreflected) source entry.
CorrectionWeights correction_weights(KernelKind kind, const Vec3 &y, const Vec3 &strength,
                                     const Vec3 &orientation);

struct PhiValue {
    double phi = 0.0;
    Vec3 grad{};
};

/// Evaluate phi and grad phi from derivatives of G taken at x - y^I.
PhiValue evaluate_phi(const CorrectionWeights &w, const HarmonicDerivs &d);

/// Same, but only with radial coefficients (skips building the tensors).
PhiValue evaluate_phi(const CorrectionWeights &w, const Vec3 &r, const RadialCoeffs &k);

/// phi and grad phi at x for the source (y, strength, orientation).
PhiValue correction_phi(KernelKind kind, const Vec3 &y, const Vec3 &strength, const Vec3 &orientation,
                        const Vec3 &x);

/// -x3 grad phi + (0, 0, phi)
inline Vec3 correction_velocity(const PhiValue &p, double x3) {
    return {-x3 * p.grad[0], -x3 * p.grad[1], -x3 * p.grad[2] + p.phi};
}

} // namespace hse
