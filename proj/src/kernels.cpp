#include "hsewald/kernels.hpp"

namespace hse {

namespace {

double checked_norm(const Vec3 &r) {
    const double rr = norm(r);
    if (!(rr > 0.0))
        throw SingularityError("kernel evaluated at zero displacement");
    return rr;
}

} // namespace

Mat3 stokeslet(const Vec3 &r) {
    const double rn = checked_norm(r);
    const double inv = 1.0 / rn;
    const double inv3 = inv * inv * inv;
    const double s = 1.0 / (8.0 * pi);
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m[i][j] = s * ((i == j ? inv : 0.0) + r[i] * r[j] * inv3);
    return m;
}

Tensor3 stresslet(const Vec3 &r) {
    const double rn = checked_norm(r);
    const double inv2 = 1.0 / (rn * rn);
    const double s = -6.0 * inv2 * inv2 / rn / (8.0 * pi);
    Tensor3 t{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                t[i][j][k] = s * r[i] * r[j] * r[k];
    return t;
}

Mat3 rotlet(const Vec3 &r) {
    const double rn = checked_norm(r);
    const double s = 1.0 / (4.0 * pi * rn * rn * rn);
    Mat3 w{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                w[i][j] += s * levi_civita(i, j, k) * r[k];
    return w;
}

Vec3 stresslet_apply(const Vec3 &r, const Vec3 &g, const Vec3 &q) {
    const double rn = checked_norm(r);
    const double inv2 = 1.0 / (rn * rn);
    const double s = -6.0 * inv2 * inv2 / rn / (8.0 * pi) * dot(r, g) * dot(r, q);
    return s * r;
}

Vec3 rotlet_apply(const Vec3 &r, const Vec3 &g, const Vec3 &q) {
    const double rn = checked_norm(r);
    const double s = 2.0 / (4.0 * pi * rn * rn * rn);
    return s * cross(cross(g, q), r);
}

HarmonicDerivs radial_derivs(const Vec3 &r, const RadialCoeffs &k) {
    HarmonicDerivs d;
    d.G = k.value;
    d.grad = k.a * r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            d.hess[i][j] = (i == j ? k.a : 0.0) + k.b * r[i] * r[j];
            for (int l = 0; l < 3; ++l) {
                double v = k.c * r[i] * r[j] * r[l];
                if (i == j)
                    v += k.b * r[l];
                if (i == l)
                    v += k.b * r[j];
                if (j == l)
                    v += k.b * r[i];
                d.third[i][j][l] = v;
            }
        }
    return d;
}

RadialCoeffs coulomb_coeffs(double r) {
    const double inv = 1.0 / r;
    const double inv2 = inv * inv;
    const double inv3 = inv2 * inv;
    return {inv, -inv3, 3.0 * inv3 * inv2, -15.0 * inv3 * inv2 * inv2};
}

HarmonicDerivs harmonic_derivs(const Vec3 &r) {
    RadialCoeffs k = coulomb_coeffs(checked_norm(r));
    const double s = 1.0 / (4.0 * pi);
    k.value *= s;
    k.a *= s;
    k.b *= s;
    k.c *= s;
    return radial_derivs(r, k);
}

CorrectionWeights correction_weights(KernelKind kind, const Vec3 &y, const Vec3 &strength,
                                     const Vec3 &orientation) {
    CorrectionWeights w;
    const double y3 = y[2];
    switch (kind) {
    case KernelKind::stokeslet: {
        const Vec3 fI = mirror(strength);
        w.charge = -2.0 * strength[2];
        w.dipole = -2.0 * y3 * fI;
        break;
    }
    case KernelKind::stresslet: {
        const Vec3 gI = mirror(strength);
        const Vec3 qI = mirror(orientation);
        w.dipole = {0.0, 0.0, 4.0 * dot(gI, qI)};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                w.quad[i][j] = -4.0 * y3 * gI[i] * qI[j];
        w.has_quad = true;
        break;
    }
    case KernelKind::rotlet: {
        const Vec3 gI = mirror(strength);
        const Vec3 qI = mirror(orientation);
        w.dipole = 4.0 * (orientation[2] * gI - strength[2] * qI);
        break;
    }
    }
    return w;
}

PhiValue evaluate_phi(const CorrectionWeights &w, const HarmonicDerivs &d) {
    PhiValue p;
    p.phi = w.charge * d.G + dot(w.dipole, d.grad);
    for (int k = 0; k < 3; ++k)
        p.grad[k] = w.charge * d.grad[k] + dot(d.hess[k], w.dipole);
    if (w.has_quad) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                p.phi += w.quad[i][j] * d.hess[i][j];
                for (int k = 0; k < 3; ++k)
                    p.grad[k] += w.quad[i][j] * d.third[i][j][k];
            }
    }
    return p;
}

PhiValue evaluate_phi(const CorrectionWeights &w, const Vec3 &r, const RadialCoeffs &k) {
    PhiValue p;
    const double rd = dot(r, w.dipole);
    p.phi = w.charge * k.value + k.a * rd;
    p.grad = (w.charge * k.a + k.b * rd) * r + k.a * w.dipole;
    if (w.has_quad) {
        const Mat3 &Q = w.quad;
        const double tr = Q[0][0] + Q[1][1] + Q[2][2];
        const Vec3 Qr = matvec(Q, r);
        const Vec3 QTr{Q[0][0] * r[0] + Q[1][0] * r[1] + Q[2][0] * r[2],
                       Q[0][1] * r[0] + Q[1][1] * r[1] + Q[2][1] * r[2],
                       Q[0][2] * r[0] + Q[1][2] * r[1] + Q[2][2] * r[2]};
        const double rQr = dot(r, Qr);
        p.phi += k.a * tr + k.b * rQr;
        p.grad += (k.b * tr + k.c * rQr) * r + k.b * (Qr + QTr);
    }
    return p;
}

PhiValue correction_phi(KernelKind kind, const Vec3 &y, const Vec3 &strength, const Vec3 &orientation,
                        const Vec3 &x) {
    const Vec3 rt = x - mirror(y);
    const double rn = norm(rt);
    if (!(rn > 0.0))
        throw SingularityError("target coincides with an image location");
    RadialCoeffs k = coulomb_coeffs(rn);
    const double s = kernel_prefactor(kind);
    k.value *= s;
    k.a *= s;
    k.b *= s;
    k.c *= s;
    return evaluate_phi(correction_weights(kind, y, strength, orientation), rt, k);
}

} // namespace hse
