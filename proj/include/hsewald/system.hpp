#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hsewald/types.hpp"

namespace hse {

// N point singularities in a cube [0, L)^3. For stokeslets `strength` holds
// the forces f and `orientation` is empty; stresslets and rotlets store the
// pair (g, q) as (strength, orientation).
struct PointSystem {
    KernelKind kind = KernelKind::stokeslet;
    Geometry geometry = Geometry::free_space;
    double box_length = 1.0;
    std::optional<std::uint64_t> seed;
    std::vector<Vec3> positions;
    std::vector<Vec3> strength;
    std::vector<Vec3> orientation;

    std::size_t size() const { return positions.size(); }
    bool has_orientation() const { return kind != KernelKind::stokeslet; }

    /// Throws ParameterError when an invariant is violated.
    void validate() const;
};

// Folded kernel-plus-image representation of a half-space system. Entries
// [0, N) are the sources, [N, 2N) the mirror images with the minus sign of the
// image kernel absorbed into `combined_strength`.
struct ImageSystem {
    KernelKind kind = KernelKind::stokeslet;
    std::size_t n_sources = 0;
    std::vector<Vec3> combined_positions;
    std::vector<Vec3> combined_strength;
    std::vector<Vec3> combined_orientation;
    // Unsigned images y^I, f^I or (g^I, q^I), plus the source heights y3.
    std::vector<Vec3> image_positions;
    std::vector<Vec3> image_strength;
    std::vector<Vec3> image_orientation;
    std::vector<double> source_height;
};

/// Deterministic random system: positions uniform in [0, L)^3 (half space:
/// third coordinate in (0, L)), strength components uniform in [-1, 1].
PointSystem generate_system(std::size_t n, double box_length, KernelKind kind, Geometry geometry,
                            std::uint64_t seed);

ImageSystem reflect(const PointSystem &system);

/// Free-space systems are treated as their own "combined" set (no images).
ImageSystem as_combined(const PointSystem &system);

// Evaluation points. self_index[t] is the index of the source located at
// target t, or -1.
struct Targets {
    std::vector<Vec3> points;
    std::vector<std::ptrdiff_t> self_index;

    std::size_t size() const { return points.size(); }
    static Targets at_sources(const PointSystem &system);
    static Targets at_points(std::vector<Vec3> pts);
};

struct VelocityResult {
    std::vector<Vec3> velocity;
    // Decomposition; empty for direct sums.
    std::vector<Vec3> real;
    std::vector<Vec3> fourier;
    std::vector<Vec3> self;

    std::size_t size() const { return velocity.size(); }
};

// ---- JSON file form -------------------------------------------------------

void save_system(const PointSystem &system, const std::filesystem::path &path);
PointSystem load_system(const std::filesystem::path &path);
std::string system_to_json(const PointSystem &system);
PointSystem system_from_json(const std::string &text);

} // namespace hse
