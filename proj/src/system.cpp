#include "hsewald/system.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace hse {

std::string_view to_string(KernelKind k) {
    switch (k) {
    case KernelKind::stokeslet:
        return "stokeslet";
    case KernelKind::stresslet:
        return "stresslet";
    case KernelKind::rotlet:
        return "rotlet";
    }
    return "?";
}

std::string_view to_string(Geometry g) { return g == Geometry::free_space ? "free_space" : "half_space"; }

KernelKind parse_kernel(std::string_view s) {
    if (s == "stokeslet")
        return KernelKind::stokeslet;
    if (s == "stresslet")
        return KernelKind::stresslet;
    if (s == "rotlet")
        return KernelKind::rotlet;
    throw ParameterError("unknown kernel '" + std::string(s) + "'");
}

Geometry parse_geometry(std::string_view s) {
    if (s == "free_space" || s == "free" || s == "fs")
        return Geometry::free_space;
    if (s == "half_space" || s == "half" || s == "hs")
        return Geometry::half_space;
    throw ParameterError("unknown geometry '" + std::string(s) + "'");
}

void PointSystem::validate() const {
    if (!(box_length > 0.0))
        throw ParameterError("box length must be positive");
    if (strength.size() != positions.size())
        throw ParameterError("strength count does not match position count");
    if (has_orientation() && orientation.size() != positions.size())
        throw ParameterError("orientation count does not match position count");
    for (const auto &y : positions) {
        for (double c : y)
            if (!(c >= 0.0 && c < box_length))
                throw ParameterError("position outside [0, L)^3");
        if (geometry == Geometry::half_space && !(y[2] > 0.0))
            throw ParameterError("half-space source on or below the wall");
    }
}

namespace {

// mt19937_64 output is fully specified by the standard; the mapping to
// doubles is done here so results do not depend on the library's
// distribution implementations.
class UniformStream {
  public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

    // [0, 1) with 53 random bits
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * unit() - 1.0; }

  private:
    std::mt19937_64 engine_;
};

} // namespace

PointSystem generate_system(std::size_t n, double box_length, KernelKind kind, Geometry geometry,
                            std::uint64_t seed) {
    if (n < 1)
        throw ParameterError("need at least one point");
    if (!(box_length > 0.0))
        throw ParameterError("box length must be positive");

    PointSystem sys;
    sys.kind = kind;
    sys.geometry = geometry;
    sys.box_length = box_length;
    sys.seed = seed;
    sys.positions.resize(n);
    sys.strength.resize(n);
    if (sys.has_orientation())
        sys.orientation.resize(n);

    UniformStream rng(seed);
    for (std::size_t m = 0; m < n; ++m) {
        Vec3 y{rng.unit() * box_length, rng.unit() * box_length, rng.unit() * box_length};
        if (geometry == Geometry::half_space)
            while (!(y[2] > 0.0))
                y[2] = rng.unit() * box_length;
        sys.positions[m] = y;
        sys.strength[m] = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        if (sys.has_orientation())
            sys.orientation[m] = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
    }
    return sys;
}

ImageSystem reflect(const PointSystem &system) {
    if (system.geometry != Geometry::half_space)
        throw UsageError("reflect requires a half-space system");
    const std::size_t n = system.size();
    const bool pair = system.has_orientation();

    ImageSystem img;
    img.kind = system.kind;
    img.n_sources = n;
    img.combined_positions.reserve(2 * n);
    img.combined_strength.reserve(2 * n);
    img.image_positions.reserve(n);
    img.image_strength.reserve(n);
    img.source_height.reserve(n);
    if (pair) {
        img.combined_orientation.reserve(2 * n);
        img.image_orientation.reserve(n);
    }

    for (std::size_t m = 0; m < n; ++m) {
        img.image_positions.push_back(mirror(system.positions[m]));
        img.image_strength.push_back(mirror(system.strength[m]));
        if (pair)
            img.image_orientation.push_back(mirror(system.orientation[m]));
        img.source_height.push_back(system.positions[m][2]);
    }

    img.combined_positions = system.positions;
    img.combined_strength = system.strength;
    if (pair)
        img.combined_orientation = system.orientation;
    for (std::size_t m = 0; m < n; ++m) {
        img.combined_positions.push_back(img.image_positions[m]);
        // Stresslet/rotlet: the sign goes on g only, so g (x) q and g x q flip.
        img.combined_strength.push_back(-img.image_strength[m]);
        if (pair)
            img.combined_orientation.push_back(img.image_orientation[m]);
    }
    return img;
}

ImageSystem as_combined(const PointSystem &system) {
    ImageSystem img;
    img.kind = system.kind;
    img.n_sources = system.size();
    img.combined_positions = system.positions;
    img.combined_strength = system.strength;
    img.combined_orientation = system.orientation;
    return img;
}

Targets Targets::at_sources(const PointSystem &system) {
    Targets t;
    t.points = system.positions;
    t.self_index.resize(system.size());
    for (std::size_t m = 0; m < system.size(); ++m)
        t.self_index[m] = static_cast<std::ptrdiff_t>(m);
    return t;
}

Targets Targets::at_points(std::vector<Vec3> pts) {
    Targets t;
    t.self_index.assign(pts.size(), -1);
    t.points = std::move(pts);
    return t;
}

// ---- JSON -----------------------------------------------------------------

using nlohmann::json;

std::string system_to_json(const PointSystem &system) {
    json j;
    j["kind"] = to_string(system.kind);
    j["geometry"] = to_string(system.geometry);
    j["L"] = system.box_length;
    if (system.seed)
        j["seed"] = *system.seed;
    json pts = json::array();
    for (std::size_t m = 0; m < system.size(); ++m) {
        json p;
        p["y"] = system.positions[m];
        if (system.has_orientation()) {
            p["g"] = system.strength[m];
            p["q"] = system.orientation[m];
        } else {
            p["f"] = system.strength[m];
        }
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    return j.dump();
}

PointSystem system_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ParameterError(std::string("malformed system JSON: ") + e.what());
    }
    PointSystem sys;
    try {
        sys.kind = parse_kernel(j.at("kind").get<std::string>());
        sys.geometry = parse_geometry(j.at("geometry").get<std::string>());
        sys.box_length = j.at("L").get<double>();
        if (j.contains("seed"))
            sys.seed = j.at("seed").get<std::uint64_t>();
        for (const auto &p : j.at("points")) {
            sys.positions.push_back(p.at("y").get<Vec3>());
            if (sys.has_orientation()) {
                sys.strength.push_back(p.at("g").get<Vec3>());
                sys.orientation.push_back(p.at("q").get<Vec3>());
            } else {
                sys.strength.push_back(p.at("f").get<Vec3>());
            }
        }
    } catch (const json::exception &e) {
        throw ParameterError(std::string("invalid system JSON: ") + e.what());
    }
    sys.validate();
    return sys;
}

void save_system(const PointSystem &system, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << system_to_json(system) << '\n';
}

PointSystem load_system(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return system_from_json(ss.str());
}

} // namespace hse
