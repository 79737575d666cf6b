#pragma once

#include <optional>
#include <vector>

#include "hsewald/system.hpp"

namespace hse {

// Statistical RMS truncation-error estimates for both halves of the Ewald
// split and tolerance-driven choice of (r_c, M). Estimates are in the
// unnormalized kernel convention; compare them against velocities divided
// by kernel_prefactor, or use relative quantities.

enum class ErrorComponent { real, fourier, total };

std::string_view to_string(ErrorComponent c);

struct ErrorReport {
    double delta_u = 0.0;
    std::optional<double> relative; // only when the reference RMS is positive
    ErrorComponent component = ErrorComponent::total;
    double xi = 0.0;
    double rc = 0.0;   // real component
    double kinf = 0.0; // Fourier component
    double L = 0.0;
    double R = 0.0;
    double Q = 0.0;
    std::size_t N = 0;
};

/// sqrt(mean |a_t|^2).
double rms_norm(const std::vector<Vec3> &v);

/// sqrt(mean |exact_t - computed_t|^2); UsageError on a length mismatch.
double rms_error(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed);
double rms_error(const VelocityResult &exact, const VelocityResult &computed);

/// rms_error divided by rms_norm(exact); DomainError when the reference is zero.
double relative_rms_error(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed);
double relative_rms_error(const VelocityResult &exact, const VelocityResult &computed);

ErrorReport error_report(const std::vector<Vec3> &exact, const std::vector<Vec3> &computed,
                         ErrorComponent component);

/// Sum of |f|^2, |g q^T|_F^2 or |g x q|^2; with images every entry counts twice.
double quantity_q(const PointSystem &system, bool include_images);

/// Truncation radius used in the Fourier estimate: sqrt(6) * L~.
double estimate_radius(double L_ext);

double fourier_truncation_estimate(KernelKind kind, double Q, double xi, double kinf, double L, double R);
double real_truncation_estimate(KernelKind kind, double Q, double xi, double rc, double L);

/// Start of the decreasing branch of the real-space estimate in r_c.
double real_estimate_turning_point(KernelKind kind, double xi);

/// Smallest even support width P (at least `floor`) with (xi P h)^2 >= ln(1e4 / tolerance).
/// Below it the zero-padded free-space convolution leaks Gaussian-screened
/// images of the kernel's periodic kink into pairs separated by about L
/// along an axis, at a level near C exp(-(xi P h)^2) with C up to about 1e4
/// in half space.
int extension_support(double xi, double h, double tolerance, int floor = 2);

struct SelectionOptions {
    /// Minimum support width; raised by extension_support when needed.
    int P = 16;
    /// The estimates must fall below tolerance * reference_rms. 1 gives an
    /// absolute tolerance.
    double reference_rms = 1.0;
    int max_M = 1024;
};

struct SelectedParameters {
    double xi = 0.0;
    double rc = 0.0;
    int M = 0;
    int P = 0;
    double eta = 0.0;
    double L_ext = 0.0;
    int M_ext = 0;
    double kinf = 0.0;
    double real_estimate = 0.0;
    double fourier_estimate = 0.0;
    double target = 0.0; // tolerance * reference_rms
};

/// Smallest r_c in the decreasing regime (bisection to 3 significant digits,
/// rounded up), smallest even M meeting the target and P from
/// extension_support for the resulting spacing. Throws
/// InfeasibleError when r_c would exceed L sqrt(3) or M would exceed max_M.
SelectedParameters select_parameters(KernelKind kind, double tolerance, double xi, double L, double Q,
                                     const SelectionOptions &options = {});

/// RMS of the unnormalized direct-sum velocity at up to `max_targets`
/// evenly strided sources.
double reference_velocity_rms(const PointSystem &system, std::size_t max_targets = 256);

/// Q from the system (images included in half space). The tolerance is
/// absolute in the unnormalized convention unless `relative` is set, in which
/// case it is scaled by reference_velocity_rms.
SelectedParameters select_parameters(const PointSystem &system, double tolerance, double xi, int P = 16,
                                     bool relative = false);

} // namespace hse
