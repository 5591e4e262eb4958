#include "hexapod/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hexapod/errors.hpp"

namespace hexapod {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

double param(const std::vector<double>& p, std::size_t i, double fallback) {
    return i < p.size() ? p[i] : fallback;
}

double bevel_factor(double inside_distance, double bevel) {
    if (inside_distance < 0.0) {
        return 0.0;
    }
    if (bevel <= 0.0) {
        return 1.0;
    }
    return std::min(1.0, inside_distance / bevel);
}

double grid_elevation(const GridTerrain& g, double x, double y) {
    const double fx = (x - g.origin_x) / g.cell;
    const double fy = (y - g.origin_y) / g.cell;
    const double max_x = g.nx - 1;
    const double max_y = g.ny - 1;
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= max_x && fy <= max_y)) {
        std::ostringstream os;
        os << "grid terrain query (" << x << ", " << y << ") outside the sampled domain";
        throw OutOfBoundsError(os.str());
    }
    const int ix = std::min(static_cast<int>(fx), g.nx - 2);
    const int iy = std::min(static_cast<int>(fy), g.ny - 2);
    const double tx = fx - ix;
    const double ty = fy - iy;
    auto at = [&](int i, int j) { return g.heights[static_cast<std::size_t>(j * g.nx + i)]; };
    return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
           tx * ty * at(ix + 1, iy + 1);
}

void validate_grid(const GridTerrain& g) {
    if (g.nx < 2 || g.ny < 2) {
        throw InvalidArgument("grid terrain needs at least 2x2 samples");
    }
    if (!(g.cell > 0.0)) {
        throw InvalidArgument("grid cell size must be positive");
    }
    if (g.heights.size() != static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny)) {
        throw InvalidArgument("grid terrain has " + std::to_string(g.heights.size()) + " samples, expected " +
                              std::to_string(g.nx * g.ny));
    }
    for (double h : g.heights) {
        if (!std::isfinite(h)) {
            throw InvalidArgument("grid terrain elevations must be finite");
        }
    }
}

}  // namespace

TerrainModel::TerrainModel(Variant model) : model_(std::move(model)) {
    if (const auto* g = std::get_if<GridTerrain>(&model_)) {
        validate_grid(*g);
    }
}

TerrainModel TerrainModel::analytic(const std::string& id, const std::vector<double>& p) {
    if (id == "flat") {
        return TerrainModel(FlatTerrain{param(p, 0, 0.0)});
    }
    if (id == "sinusoid") {
        SinusoidTerrain s{param(p, 0, 50.0), param(p, 1, 100.0), param(p, 2, 100.0), param(p, 3, 0.0)};
        if (!(s.period_x > 0.0) || !(s.period_y > 0.0)) {
            throw InvalidArgument("sinusoid periods must be positive");
        }
        return TerrainModel(s);
    }
    if (id == "ramp") {
        RampTerrain r{param(p, 0, 0.0), param(p, 1, 0.0), param(p, 2, 0.0)};
        if (std::abs(r.angle) >= 1.5) {
            throw InvalidArgument("ramp angle must be well below 90 degrees");
        }
        return TerrainModel(r);
    }
    if (id == "box") {
        if (p.size() < 5) {
            throw InvalidArgument("box terrain needs x_min, x_max, y_min, y_max, height");
        }
        BoxTerrain b{p[0], p[1], p[2], p[3], p[4], param(p, 5, 0.0), param(p, 6, 0.0)};
        if (!(b.x_max > b.x_min) || !(b.y_max > b.y_min) || b.bevel < 0.0) {
            throw InvalidArgument("box terrain bounds are inconsistent");
        }
        return TerrainModel(b);
    }
    throw InvalidArgument("unknown analytic terrain id '" + id + "'");
}

TerrainModel TerrainModel::load_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open grid terrain file " + path.string());
    }
    GridTerrain g;
    bool have_origin = false;
    bool have_cell = false;
    bool have_dims = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) {
            continue;
        }
        auto fail = [&](const std::string& msg) {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (head == "origin") {
            if (!(ls >> g.origin_x >> g.origin_y)) fail("origin needs two numbers");
            have_origin = true;
        } else if (head == "cell") {
            if (!(ls >> g.cell)) fail("cell needs one number");
            have_cell = true;
        } else if (head == "dims") {
            if (!(ls >> g.nx >> g.ny)) fail("dims needs two integers");
            have_dims = true;
        } else {
            std::istringstream values(line);
            double v = 0.0;
            while (values >> v) {
                g.heights.push_back(v);
            }
            if (!values.eof()) fail("unparseable elevation value");
        }
    }
    if (!have_origin || !have_cell || !have_dims) {
        throw InvalidArgument(path.string() + ": grid header needs origin, cell and dims");
    }
    return TerrainModel(std::move(g));
}

double TerrainModel::elevation(double x, double y) const {
    return std::visit(
        Overloaded{
            [](const FlatTerrain& f) { return f.z0; },
            [&](const SinusoidTerrain& s) {
                return s.z0 + s.amplitude * (std::sin(x / s.period_x) + std::cos(y / s.period_y));
            },
            [&](const RampTerrain& r) { return r.z0 + std::max(0.0, x - r.start_x) * std::tan(r.angle); },
            [&](const BoxTerrain& b) {
                const double fx = bevel_factor(std::min(x - b.x_min, b.x_max - x), b.bevel);
                const double fy = bevel_factor(std::min(y - b.y_min, b.y_max - y), b.bevel);
                return b.z0 + b.height * std::min(fx, fy);
            },
            [&](const GridTerrain& g) { return grid_elevation(g, x, y); },
        },
        model_);
}

std::string TerrainModel::kind() const {
    return std::visit(Overloaded{
                          [](const FlatTerrain&) { return std::string("flat"); },
                          [](const SinusoidTerrain&) { return std::string("sinusoid"); },
                          [](const RampTerrain&) { return std::string("ramp"); },
                          [](const BoxTerrain&) { return std::string("box"); },
                          [](const GridTerrain&) { return std::string("grid"); },
                      },
                      model_);
}

double elevation(const TerrainModel& terrain, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw InvalidArgument("terrain query must be finite");
    }
    return terrain.elevation(x, y);
}

}  // namespace hexapod
