#include "hsewald/ewald.hpp"

#include <chrono>

namespace hse {

EwaldSolver::EwaldSolver(KernelKind kind, Geometry geometry, double box_length, const EwaldParams &params,
                         const EwaldOptions &options)
    : kind_(kind), params_(params), options_(options),
      grid_(options.real_only ? GridSpec{geometry, box_length, params.xi}
                              : GridSpec::make(geometry, box_length, params.M, params.P, params.xi)) {
    RealSpaceParams{params.xi, params.rc}.validate();
    if (!options_.real_only)
        fourier_ = std::make_unique<FourierSolver>(kind, grid_, options_.fourier);
}

void EwaldSolver::reset_stats() {
    stats_ = {};
    if (fourier_) {
        fourier_->reset_stats();
        stats_.fourier = fourier_->stats();
    }
}

VelocityResult EwaldSolver::evaluate(const PointSystem &system, const Targets &targets) {
    const auto t0 = std::chrono::steady_clock::now();
    VelocityResult res = real_space_sum(system, {params_.xi, params_.rc}, targets);
    stats_.real_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (fourier_) {
        res.fourier = fourier_->evaluate(system, targets).velocity;
        stats_.fourier = fourier_->stats();
        for (std::size_t t = 0; t < targets.size(); ++t)
            res.velocity[t] += res.fourier[t];
    } else {
        res.fourier.assign(targets.size(), Vec3{});
    }
    return res;
}

VelocityResult ewald_sum(const PointSystem &system, const EwaldParams &params, const Targets &targets,
                         const EwaldOptions &options, EwaldStats *stats) {
    EwaldSolver solver(system.kind, system.geometry, system.box_length, params, options);
    VelocityResult r = solver.evaluate(system, targets);
    if (stats)
        *stats = solver.stats();
    return r;
}

} // namespace hse
