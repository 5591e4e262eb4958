#include "hexapod/terrain_compensation.hpp"

#include <cmath>

#include "hexapod/errors.hpp"
#include "hexapod/terrain.hpp"

namespace hexapod {

using namespace comp;

namespace {

Vec7 cold_start() { return (Vec7() << 0, 0, 1, 1, 0, 0, 0).finished(); }

// Keeps (b, d) and (c, e) on the unit circle.
void project(Vec7& x) {
    auto fix = [](double& s, double& c) {
        const double n = std::hypot(s, c);
        if (n < 1e-12) {
            s = 0.0;
            c = 1.0;
            return;
        }
        s /= n;
        c /= n;
    };
    fix(x[B], x[D]);
    fix(x[E], x[C]);
}

// Body-frame offset of a shoulder point after the trial reorientation, from raw variables.
Vec3 reoriented(const Vec3& p, const Vec7& v) {
    const double qy = v[C] * p.y() - v[E] * p.z();
    const double qz = v[E] * p.y() + v[C] * p.z();
    return {v[D] * p.x() + v[B] * qz, qy, v[A] - v[B] * p.x() + v[D] * qz};
}

}  // namespace

std::array<Vec3, kLegCount> shoulder_points_global(const Transform4& gait, const Vec7& vars,
                                                   const RobotGeometry& geom) {
    std::array<Vec3, kLegCount> out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = gait.apply(reoriented(geom.legs[i].shoulder, vars));
    }
    return out;
}

std::array<Vec3, kLegCount> shoulder_points_global(const Transform4& gait, double dz, double alpha, double beta,
                                                   const RobotGeometry& geom) {
    const Transform4 t = gait * translation(0.0, 0.0, dz) * rotation(Axis::Y, alpha) * rotation(Axis::X, beta);
    std::array<Vec3, kLegCount> out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = t.apply(geom.legs[i].shoulder);
    }
    return out;
}

std::array<Vec3, kLegCount> shoulder_points_global(const BodyChainState& state, double dz, double alpha, double beta,
                                                   const RobotGeometry& geom) {
    return shoulder_points_global(state.gait, dz, alpha, beta, geom);
}

ShoulderSamples sample_shoulders(const Transform4& gait, const Vec7& vars, const TerrainModel& terrain,
                                 const RobotGeometry& geom) {
    ShoulderSamples s;
    const auto global = shoulder_points_global(gait, vars, geom);
    for (std::size_t i = 0; i < global.size(); ++i) {
        s.body[i] = geom.legs[i].shoulder;
        s.heights[i] = elevation(terrain, global[i].x(), global[i].y());
    }
    s.base_z = gait.translation().z();
    s.start_z = geom.start_position.z();
    return s;
}

std::array<double, kLegCount> height_errors(const Vec7& v, const ShoulderSamples& s) {
    std::array<double, kLegCount> eps;
    for (std::size_t j = 0; j < eps.size(); ++j) {
        const Vec3& p = s.body[j];
        eps[j] = s.base_z + v[A] - p.x() * v[B] + p.z() * v[C] * v[D] + p.y() * v[D] * v[E] - s.heights[j] -
                 s.start_z;
    }
    return eps;
}

double height_cost(const Vec7& vars, const ShoulderSamples& samples) {
    double f = 0.0;
    for (double e : height_errors(vars, samples)) {
        f += e * e;
    }
    return f;
}

double lagrangian(const Vec7& v, const ShoulderSamples& samples) {
    return height_cost(v, samples) + v[L1] * (v[C] * v[C] + v[E] * v[E] - 1.0) +
           v[L2] * (v[B] * v[B] + v[D] * v[D] - 1.0);
}

Vec7 lagrangian_gradient(const Vec7& v, const ShoulderSamples& s) {
    const auto eps = height_errors(v, s);
    Vec7 g = Vec7::Zero();
    for (std::size_t j = 0; j < eps.size(); ++j) {
        const double e2 = 2.0 * eps[j];
        const Vec3& p = s.body[j];
        g[A] += e2;
        g[B] += e2 * (-p.x());
        g[C] += e2 * (p.z() * v[D]);
        g[D] += e2 * (p.z() * v[C] + p.y() * v[E]);
        g[E] += e2 * (p.y() * v[D]);
    }
    g[B] += 2.0 * v[L2] * v[B];
    g[C] += 2.0 * v[L1] * v[C];
    g[D] += 2.0 * v[L2] * v[D];
    g[E] += 2.0 * v[L1] * v[E];
    g[L1] = v[C] * v[C] + v[E] * v[E] - 1.0;
    g[L2] = v[B] * v[B] + v[D] * v[D] - 1.0;
    return g;
}

CompensationSolution compensate(const Transform4& gait, const TerrainModel& terrain, const RobotGeometry& geom,
                                const CompensationParams& params,
                                const std::optional<CompensationSolution>& warm_start) {
    if (!(params.weight > 0.0) || !(params.tol > 0.0) || params.max_iters < 1 || !(params.height_scale > 0.0)) {
        throw InvalidArgument("compensation parameters must be positive");
    }
    Vec7 x = warm_start ? warm_start->vars : cold_start();
    if (!x.allFinite()) {
        x = cold_start();
    }
    project(x);

    Vec7 scale = Vec7::Ones();
    scale[A] = params.height_scale * params.height_scale;

    CompensationSolution sol;
    for (int it = 1; it <= params.max_iters; ++it) {
        const ShoulderSamples samples = sample_shoulders(gait, x, terrain, geom);
        const Vec7 step = params.weight * scale.cwiseProduct(lagrangian_gradient(x, samples));
        const double f0 = height_cost(x, samples);

        // Halve the step until the cost on the frozen samples does not increase.
        Vec7 next = x;
        double t = 1.0;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            next = x - t * step;
            project(next);
            if (height_cost(next, samples) <= f0 + 1e-12) {
                break;
            }
        }
        if (!next.allFinite()) {
            break;
        }
        const double change = (next - x).norm();
        x = next;
        sol.iterations = it;
        if (change <= params.tol) {
            sol.converged = true;
            break;
        }
    }

    sol.vars = x;
    sol.dz = x[A];
    sol.alpha = std::atan2(x[B], x[D]);
    sol.beta = std::atan2(x[E], x[C]);
    sol.cost = height_cost(x, sample_shoulders(gait, x, terrain, geom));
    return sol;
}

CompensationSolution compensate(const BodyChainState& state, const TerrainModel& terrain, const RobotGeometry& geom,
                                const CompensationParams& params,
                                const std::optional<CompensationSolution>& warm_start) {
    return compensate(state.gait, terrain, geom, params, warm_start);
}

Transform4 build_q_ter(const CompensationSolution& sol) {
    if (!sol.converged) {
        throw InvalidArgument("cannot build a terrain transform from an unconverged solution");
    }
    return translation(0.0, 0.0, sol.dz) * rotation(Axis::Y, sol.alpha) * rotation(Axis::X, sol.beta);
}

Transform4 build_q_ter_horizontal(const CompensationSolution& sol) {
    if (!sol.converged) {
        throw InvalidArgument("cannot build a terrain transform from an unconverged solution");
    }
    return translation(0.0, 0.0, sol.dz);
}

CompensationMode parse_compensation_mode(const std::string& name) {
    if (name == "full") return CompensationMode::Full;
    if (name == "horizontal_body" || name == "horizontal") return CompensationMode::HorizontalBody;
    if (name == "off") return CompensationMode::Off;
    throw InvalidArgument("unknown terrain compensation mode '" + name + "'");
}

std::string to_string(CompensationMode mode) {
    switch (mode) {
        case CompensationMode::Full:
            return "full";
        case CompensationMode::HorizontalBody:
            return "horizontal_body";
        case CompensationMode::Off:
            return "off";
    }
    return "unknown";
}

TerrainCompensator::TerrainCompensator(CompensationMode mode, CompensationParams params)
    : mode_(mode), params_(params) {
    active_.converged = true;
}

Transform4 TerrainCompensator::update(const Transform4& gait, const TerrainModel& terrain,
                                      const RobotGeometry& geom) {
    fell_back_ = false;
    if (mode_ == CompensationMode::Off) {
        return Transform4::identity();
    }
    CompensationSolution sol = compensate(gait, terrain, geom, params_, active_);
    last_solve_ = sol;
    if (sol.converged) {
        active_ = sol;
    } else {
        fell_back_ = true;
    }
    return mode_ == CompensationMode::Full ? build_q_ter(active_) : build_q_ter_horizontal(active_);
}

}  // namespace hexapod
