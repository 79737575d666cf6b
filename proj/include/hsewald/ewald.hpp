#pragma once

#include <memory>

#include "hsewald/ewald_real.hpp"
#include "hsewald/fourier.hpp"

namespace hse {

struct EwaldParams {
    double xi = 0.0;
    double rc = 0.0;
    int M = 0;
    int P = 16;
};

struct EwaldOptions {
    FourierOptions fourier;
    bool real_only = false;
};

struct EwaldStats {
    double real_seconds = 0.0;
    FourierStats fourier;
};

// Real part + Fourier part + self term. Holds the Fourier solver so repeated
// evaluations on systems of the same shape reuse plans and tables.
class EwaldSolver {
  public:
    EwaldSolver(KernelKind kind, Geometry geometry, double box_length, const EwaldParams &params,
                const EwaldOptions &options = {});

    VelocityResult evaluate(const PointSystem &system, const Targets &targets);

    const GridSpec &grid() const { return grid_; }
    const EwaldStats &stats() const { return stats_; }
    void reset_stats();

  private:
    KernelKind kind_;
    EwaldParams params_;
    EwaldOptions options_;
    GridSpec grid_;
    std::unique_ptr<FourierSolver> fourier_;
    EwaldStats stats_;
};

VelocityResult ewald_sum(const PointSystem &system, const EwaldParams &params, const Targets &targets,
                         const EwaldOptions &options = {}, EwaldStats *stats = nullptr);

} // namespace hse
