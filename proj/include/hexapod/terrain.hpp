#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace hexapod {

struct FlatTerrain {
    double z0 = 0.0;
};

/// h = amplitude * (sin(x / period_x) + cos(y / period_y)) + z0
struct SinusoidTerrain {
    double amplitude = 50.0;
    double period_x = 100.0;
    double period_y = 100.0;
    double z0 = 0.0;
};

/// Flat at z0 up to start_x, then rising along +x with the given angle.
struct RampTerrain {
    double start_x = 0.0;
    double angle = 0.0;
    double z0 = 0.0;
};

/// Flat ground at z0 with a raised block. Edges are linear bevels of width `bevel`
/// (zero gives vertical walls).
struct BoxTerrain {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    double height = 0.0;
    double bevel = 0.0;
    double z0 = 0.0;
};

/// Regular elevation grid with bilinear interpolation. Row-major: value (ix, iy)
/// at index iy * nx + ix, located at (origin_x + ix * cell, origin_y + iy * cell).
struct GridTerrain {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> heights;
};

/// Terrain elevation function h(x, y) in millimetres.
class TerrainModel {
public:
    using Variant = std::variant<FlatTerrain, SinusoidTerrain, RampTerrain, BoxTerrain, GridTerrain>;

    TerrainModel() : model_(FlatTerrain{}) {}
    TerrainModel(Variant model);  // NOLINT(google-explicit-constructor)

    static TerrainModel flat(double z0 = 0.0) { return TerrainModel(FlatTerrain{z0}); }

    /// Analytic terrain from an id and positional parameters:
    ///   flat [z0], sinusoid [amplitude, period_x, period_y, z0], ramp [start_x, angle_rad, z0],
    ///   box [x_min, x_max, y_min, y_max, height, bevel, z0].
    /// Missing trailing parameters take the defaults above.
    static TerrainModel analytic(const std::string& id, const std::vector<double>& params);

    /// Reads a grid file: `origin <x> <y>`, `cell <size>`, `dims <nx> <ny>` header lines
    /// followed by nx*ny row-major elevations. '#' starts a comment.
    static TerrainModel load_grid(const std::filesystem::path& path);

    double elevation(double x, double y) const;
    const Variant& model() const { return model_; }
    std::string kind() const;

private:
    Variant model_;
};

/// Throws OutOfBoundsError for grid queries outside the sampled domain.
double elevation(const TerrainModel& terrain, double x, double y);

}  // namespace hexapod
