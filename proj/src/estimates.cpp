#include "hsewald/estimates.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hsewald/direct.hpp"
#include "hsewald/fourier.hpp"

namespace hse {

std::string_view to_string(ErrorComponent c) {
    switch (c) {
    case ErrorComponent::real:
        return "real";
    case ErrorComponent::fourier:
        return "fourier";
    case ErrorComponent::total:
        return "total";
    }
    return "?";
}

double rms_norm(const std::vector<Vec3> &v) {
    if (v.empty())
        return 0.0;
    double s = 0.0;
    for (const auto &a : v)
        s += dot(a, a);
    return std::sqrt(s / double(v.size()));
}

double rms_error(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed) {
    if (exact.size() != computed.size())
        throw UsageError(fmt::format("rms_error: {} exact values vs {} computed", exact.size(), computed.size()));
    if (exact.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const Vec3 d = exact[i] - computed[i];
        s += dot(d, d);
    }
    return std::sqrt(s / double(exact.size()));
}

double rms_error(const VelocityResult &exact, const VelocityResult &computed) {
    return rms_error(exact.velocity, computed.velocity);
}

double relative_rms_error(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed) {
    const double ref = rms_norm(exact);
    if (!(ref > 0.0))
        throw DomainError("relative error needs a nonzero reference field");
    return rms_error(exact, computed) / ref;
}

double relative_rms_error(const VelocityResult &exact, const VelocityResult &computed) {
    return relative_rms_error(exact.velocity, computed.velocity);
}

ErrorReport error_report(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed,
                         ErrorComponent component) {
    ErrorReport r;
    r.component = component;
    r.delta_u = rms_error(exact, computed);
    r.N = exact.size();
    const double ref = rms_norm(exact);
    if (ref > 0.0)
        r.relative = r.delta_u / ref;
    return r;
}

double quantity_q(const PointSystem &system, bool include_images) {
    double q = 0.0;
    for (std::size_t m = 0; m < system.size(); ++m) {
        const Vec3 &a = system.strength[m];
        switch (system.kind) {
        case KernelKind::stokeslet:
            q += dot(a, a);
            break;
        case KernelKind::stresslet:
            q += dot(a, a) * dot(system.orientation[m], system.orientation[m]);
            break;
        case KernelKind::rotlet: {
            const Vec3 v = cross(a, system.orientation[m]);
            q += dot(v, v);
            break;
        }
        }
    }
    // the mirror map is an isometry
    return include_images ? 2.0 * q : q;
}

double estimate_radius(double L_ext) { return std::sqrt(6.0) * L_ext; }

double fourier_truncation_estimate(KernelKind kind, double Q, double xi, double kinf, double L, double R) {
    const double decay = std::exp(-kinf * kinf / (4.0 * xi * xi));
    switch (kind) {
    case KernelKind::stokeslet:
        return std::sqrt(Q) * R * std::pow(kinf, 3) / (xi * xi * pi * L) * decay;
    case KernelKind::stresslet:
        return std::sqrt(7.0 * Q / 6.0) * R * std::pow(kinf, 4) / (xi * xi * pi * L) * decay;
    case KernelKind::rotlet:
        return std::sqrt(8.0 * xi * xi * Q / (3.0 * pi * std::pow(L, 3) * kinf)) * decay;
    }
    return 0.0;
}

double real_truncation_estimate(KernelKind kind, double Q, double xi, double rc, double L) {
    const double decay = std::exp(-xi * xi * rc * rc);
    const double L3 = L * L * L;
    switch (kind) {
    case KernelKind::stokeslet:
        return std::sqrt(4.0 * Q * rc / L3) * decay;
    case KernelKind::stresslet:
        return std::sqrt(112.0 * Q * std::pow(xi, 4) * std::pow(rc, 3) / (9.0 * L3)) * decay;
    case KernelKind::rotlet:
        return std::sqrt(8.0 * Q / (3.0 * L3 * rc)) * decay;
    }
    return 0.0;
}

double real_estimate_turning_point(KernelKind kind, double xi) {
    switch (kind) {
    case KernelKind::stokeslet:
        return 0.5 / xi;
    case KernelKind::stresslet:
        return std::sqrt(3.0) / (2.0 * xi);
    case KernelKind::rotlet:
        return 0.0;
    }
    return 0.0;
}

int extension_support(double xi, double h, double tolerance, int floor) {
    if (!(xi > 0.0) || !(h > 0.0) || !(tolerance > 0.0))
        throw ParameterError("extension_support needs positive xi, spacing and tolerance");
    const double need = std::sqrt(std::log(1e4 / tolerance)) / (xi * h);
    int P = std::max(floor, static_cast<int>(std::ceil(need - 1e-12)));
    P += P % 2;
    return P;
}

namespace {

double round_up_3_digits(double v) {
    const double unit = std::pow(10.0, std::floor(std::log10(v)) - 2.0);
    return std::ceil(v / unit - 1e-9) * unit;
}

// the Fourier estimate at k_inf = pi M~/L~ for the grid built from (L, M, P)
double fourier_estimate_for(KernelKind kind, double Q, double xi, double L, int M, int P) {
    const double h = L / M;
    const double Lt = L + P * h;
    const double kinf = pi * (M + P) / Lt;
    return fourier_truncation_estimate(kind, Q, xi, kinf, L, estimate_radius(Lt));
}

} // namespace

SelectedParameters select_parameters(KernelKind kind, double tolerance, double xi, double L, double Q,
                                     const SelectionOptions &opt) {
    if (!(tolerance > 0.0))
        throw ParameterError("tolerance must be positive");
    if (!(xi > 0.0))
        throw ParameterError("Ewald parameter xi must be positive");
    if (!(L > 0.0))
        throw ParameterError("box length must be positive");
    if (!(Q >= 0.0) || !(opt.reference_rms > 0.0))
        throw ParameterError("Q must be non-negative and the reference RMS positive");
    if (opt.P < 2)
        throw ParameterError("support width P must be at least 2");

    SelectedParameters s;
    s.xi = xi;
    s.P = opt.P;
    s.target = tolerance * opt.reference_rms;
    auto real_est = [&](double rc) { return real_truncation_estimate(kind, Q, xi, rc, L); };

    // r_c: bisection on the decreasing branch
    const double rc_max = L * std::sqrt(3.0);
    double lo = std::max(real_estimate_turning_point(kind, xi), 1e-6 * rc_max);
    double hi = rc_max;
    if (real_est(hi) > s.target)
        throw InfeasibleError(fmt::format("real-space tolerance {:g} needs r_c > L sqrt(3) = {:g}; use a larger xi",
                                          s.target, rc_max));
    if (real_est(lo) <= s.target) {
        hi = lo;
    } else {
        while (hi - lo > 1e-4 * hi) {
            const double mid = 0.5 * (lo + hi);
            (real_est(mid) <= s.target ? hi : lo) = mid;
        }
    }
    s.rc = std::min(round_up_3_digits(hi), rc_max);
    s.real_estimate = real_est(s.rc);

    // M: even values on the decreasing branch of the Fourier estimate; P and M
    // are coupled through the extended box, so iterate until P settles
    const double k_turn = kind == KernelKind::stokeslet ? std::sqrt(6.0) * xi
                          : kind == KernelKind::stresslet ? std::sqrt(8.0) * xi
                                                          : 0.0;
    int M0 = std::max(2, static_cast<int>(std::ceil(k_turn * L / pi)));
    M0 += M0 % 2;
    int P = opt.P, M = M0;
    for (int iter = 0; iter < 8; ++iter) {
        M = M0;
        while (fourier_estimate_for(kind, Q, xi, L, M, P) > s.target) {
            M += 2;
            if (M > opt.max_M)
                throw InfeasibleError(
                    fmt::format("Fourier-space tolerance {:g} needs M > {}; use a smaller xi", s.target, opt.max_M));
        }
        const int P_need = extension_support(xi, L / M, tolerance, opt.P);
        if (P_need <= P)
            break;
        P = P_need;
    }
    if (P > max_support_width)
        throw InfeasibleError(fmt::format("grid extension needs support width {} > {}; use a larger xi or "
                                          "a looser tolerance",
                                          P, max_support_width));
    s.P = P;
    s.M = M;
    const GridSpec g = GridSpec::make(Geometry::free_space, L, M, P, xi);
    s.M = g.M;
    s.eta = g.eta;
    s.L_ext = g.Lt;
    s.M_ext = g.Mt;
    s.kinf = g.kinf;
    s.fourier_estimate = fourier_estimate_for(kind, Q, xi, L, g.M, P);
    return s;
}

double reference_velocity_rms(const PointSystem &system, std::size_t max_targets) {
    const std::size_t n = system.size();
    if (n == 0)
        throw ParameterError("empty system");
    const std::size_t count = std::min(n, std::max<std::size_t>(max_targets, 1));
    const std::size_t stride = n / count;
    Targets t;
    for (std::size_t i = 0; i < count; ++i) {
        t.points.push_back(system.positions[i * stride]);
        t.self_index.push_back(static_cast<std::ptrdiff_t>(i * stride));
    }
    return rms_norm(direct_sum(system, t).velocity) / kernel_prefactor(system.kind);
}

SelectedParameters select_parameters(const PointSystem &system, double tolerance, double xi, int P,
                                     bool relative) {
    SelectionOptions opt;
    opt.P = P;
    if (relative)
        opt.reference_rms = reference_velocity_rms(system);
    const double Q = quantity_q(system, system.geometry == Geometry::half_space);
    return select_parameters(system.kind, tolerance, xi, system.box_length, Q, opt);
}

} // namespace hse
