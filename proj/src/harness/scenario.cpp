#include "hexapod/harness/scenario.hpp"

#include <cmath>
#include <numbers>

#include "hexapod/errors.hpp"

namespace hexapod::harness {

ControlMode parse_control_mode(const std::string& name) {
    if (name == "open_loop") return ControlMode::OpenLoop;
    if (name == "closed_loop") return ControlMode::ClosedLoop;
    throw ConfigError("scenario.mode must be open_loop or closed_loop, got '" + name + "'", "scenario.mode");
}

std::string to_string(ControlMode mode) { return mode == ControlMode::OpenLoop ? "open_loop" : "closed_loop"; }

long Scenario::tick_count() const { return std::lround(duration * tick_rate); }

GaitCommand Scenario::command_at(double t) const {
    GaitCommand cmd;
    for (const CommandPoint& p : commands) {
        if (p.t > t + 1e-9) break;
        cmd = p.command;
    }
    return cmd;
}

void Scenario::validate() const {
    if (!(tick_rate > 0.0) || !std::isfinite(tick_rate)) {
        throw ConfigError("scenario.tick_rate must be positive", "scenario.tick_rate");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ConfigError("scenario.duration must be positive", "scenario.duration");
    }
    if (!(payload >= 0.0)) throw ConfigError("scenario.payload must be non-negative", "scenario.payload");
    if (!(event_threshold > 0.0)) {
        throw ConfigError("scenario.event_threshold must be positive", "scenario.event_threshold");
    }
    geometry.validate();
    try {
        gait.validate();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        throw ConfigError(msg, msg.substr(0, msg.find(':')));
    }
    if (std::abs(gait.dt - dt()) > 1e-12) {
        throw ConfigError("gait.dt must equal 1 / scenario.tick_rate", "gait.dt");
    }
    plant.validate();
    control.validate();
    if (!(compensation_params.weight > 0.0)) {
        throw ConfigError("compensation.weight must be positive", "compensation.weight");
    }
    if (!(compensation_params.tol > 0.0)) throw ConfigError("compensation.tol must be positive", "compensation.tol");
    if (compensation_params.max_iters < 1) {
        throw ConfigError("compensation.max_iters must be positive", "compensation.max_iters");
    }
    if (!(compensation_params.height_scale > 0.0)) {
        throw ConfigError("compensation.height_scale must be positive", "compensation.height_scale");
    }
    double last = 0.0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const CommandPoint& p = commands[i];
        if (p.t < last || !std::isfinite(p.t)) {
            throw ConfigError("scenario.commands times must be non-negative and non-decreasing", "scenario.commands");
        }
        last = p.t;
    }
    if (goal_x && !std::isfinite(*goal_x)) throw ConfigError("scenario.goal_x must be finite", "scenario.goal_x");

    // Both terrains must cover the starting footprint.
    for (const auto& [terrain, field] :
         {std::pair<const TerrainModel*, const char*>{&believed, "terrain.believed"}, {&true_terrain, "terrain.true"}}) {
        for (const LegMount& m : geometry.legs) {
            const Vec3 p = geometry.start_position + m.neutral;
            try {
                elevation(*terrain, p.x(), p.y());
            } catch (const OutOfBoundsError& e) {
                throw ConfigError(std::string(field) + " does not cover the starting footprint: " + e.what(), field);
            }
        }
    }
}

namespace {

void scale_link(LinkInertial& link, double mass) {
    if (mass <= 0.0 || link.mass <= 0.0) {
        link.mass = mass;
        return;
    }
    link.inertia_com *= mass / link.mass;
    link.mass = mass;
}

RobotGeometry read_geometry(const ConfigDocument& doc) {
    RobotGeometry g = RobotGeometry::phantomx_defaults();
    g.coxa_length = doc.require_number("robot.l_c");
    g.femur_length = doc.require_number("robot.l_f");
    g.tibia_length = doc.require_number("robot.l_t");

    const double front_x = doc.number("robot.front_x", 120.0);
    const double half_width = doc.number("robot.half_width", 60.0);
    const double shoulder_z = doc.number("robot.shoulder_z", 0.0);
    const double xs[] = {front_x, 0.0, -front_x};
    for (int i = 0; i < kLegCount; ++i) {
        LegMount& m = g.legs[static_cast<std::size_t>(i)];
        m.x = xs[i % 3];
        m.y = i < 3 ? -half_width : half_width;
        m.shoulder = Vec3(m.x, m.y, shoulder_z);
    }
    g.start_position.z() = doc.number("robot.body_height", g.start_position.z());
    g.joint_limit = doc.number("robot.joint_limit", g.joint_limit);
    scale_link(g.body, doc.number("robot.body_mass", g.body.mass));
    scale_link(g.coxa, doc.number("robot.coxa_mass", g.coxa.mass));
    scale_link(g.femur, doc.number("robot.femur_mass", g.femur.mass));
    scale_link(g.tibia, doc.number("robot.tibia_mass", g.tibia.mass));
    g.set_radial_neutral(doc.number("robot.neutral_radius", 130.0));
    return g;
}

TerrainModel read_terrain(const ConfigDocument& doc, const std::string& section,
                          const std::filesystem::path& base_dir) {
    const std::string kind = doc.string(section + ".kind", "flat");
    auto n = [&](const char* key, double fallback) { return doc.number(section + "." + key, fallback); };
    try {
        if (kind == "flat") return TerrainModel::analytic("flat", {n("z0", 0.0)});
        if (kind == "sinusoid") {
            return TerrainModel::analytic("sinusoid",
                                          {n("amplitude", 50.0), n("period_x", 100.0), n("period_y", 100.0), n("z0", 0.0)});
        }
        if (kind == "ramp") return TerrainModel::analytic("ramp", {n("start_x", 0.0), n("angle", 0.0), n("z0", 0.0)});
        if (kind == "box") {
            for (const char* key : {"x_min", "x_max", "y_min", "y_max", "height"}) {
                doc.require_number(section + "." + key);
            }
            return TerrainModel::analytic("box", {n("x_min", 0), n("x_max", 0), n("y_min", 0), n("y_max", 0),
                                                  n("height", 0), n("bevel", 0.0), n("z0", 0.0)});
        }
        if (kind == "grid") {
            std::filesystem::path file = doc.require_string(section + ".file");
            if (file.is_relative()) file = base_dir / file;
            return TerrainModel::load_grid(file);
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(section + ": " + e.what(), section);
    }
    throw ConfigError(section + ".kind must be flat, sinusoid, ramp, box or grid, got '" + kind + "'",
                      section + ".kind");
}

}  // namespace

Scenario scenario_from_document(const ConfigDocument& doc, const std::filesystem::path& base_dir) {
    Scenario s;
    s.source = doc.source();
    s.name = doc.string("scenario.name", std::filesystem::path(doc.source()).stem().string());
    s.payload = doc.number("scenario.payload", 0.0);
    s.geometry = read_geometry(doc);
    s.geometry.body.mass += s.payload;

    s.believed = read_terrain(doc, "terrain.believed", base_dir);
    s.true_terrain = doc.has_section("terrain.true") ? read_terrain(doc, "terrain.true", base_dir) : s.believed;

    s.tick_rate = doc.number("scenario.tick_rate", 30.0);
    s.duration = doc.number("scenario.duration", 10.0);
    if (!(s.tick_rate > 0.0)) throw ConfigError("scenario.tick_rate must be positive", "scenario.tick_rate");

    try {
        s.gait = select_gait(doc.string("gait.name", "tripod"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), "gait.name");
    }
    s.gait.steps_per_phase = doc.integer("gait.steps_per_phase", s.gait.steps_per_phase);
    s.gait.lowering_ticks = doc.integer("gait.lowering_ticks", s.gait.lowering_ticks);
    s.gait.lift_height = doc.number("gait.lift_height", s.gait.lift_height);
    s.gait.max_vx = doc.number("gait.max_vx", s.gait.max_vx);
    s.gait.max_vy = doc.number("gait.max_vy", s.gait.max_vy);
    s.gait.max_wz = doc.number("gait.max_wz", s.gait.max_wz);
    s.gait.max_stride = doc.number("gait.max_stride", s.gait.max_stride);
    s.gait.dt = s.dt();

    for (const std::vector<double>& row : doc.rows("scenario.commands")) {
        if (row.size() != 4) {
            throw ConfigError("scenario.commands entries must be [t, vx, vy, wz]", "scenario.commands");
        }
        s.commands.push_back({row[0], {row[1], row[2], row[3]}});
    }
    s.mode = parse_control_mode(doc.string("scenario.mode", "closed_loop"));
    try {
        s.compensation = parse_compensation_mode(doc.string("scenario.compensation", "full"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), "scenario.compensation");
    }
    const double seed = doc.number("scenario.seed", 1.0);
    if (seed < 0.0 || seed != std::floor(seed) || seed > 9.0e15) {
        throw ConfigError("scenario.seed must be a non-negative integer", "scenario.seed");
    }
    s.seed = static_cast<std::uint64_t>(seed);
    if (doc.has("scenario.goal_x")) s.goal_x = doc.number("scenario.goal_x", 0.0);
    if (doc.has("scenario.max_attitude_deg")) s.max_attitude_deg = doc.number("scenario.max_attitude_deg", 0.0);
    s.event_threshold = doc.number("scenario.event_threshold", s.event_threshold);

    PlantParams& p = s.plant;
    p.dt = s.dt();
    p.servo_tau = doc.number("scenario.servo_tau", p.servo_tau);
    p.servo_deadband = doc.number("scenario.servo_deadband", p.servo_deadband);
    p.noise_sigma = doc.number("scenario.noise_sigma", p.noise_sigma);
    p.contact_threshold = doc.number("scenario.contact_threshold", p.contact_threshold);
    p.release_threshold = doc.number("scenario.release_threshold", p.release_threshold);
    p.stop_tolerance = doc.number("scenario.stop_tolerance", p.stop_tolerance);
    p.dynamic_torques = doc.boolean("scenario.dynamic_torques", p.dynamic_torques);
    const bool drift = doc.boolean("scenario.drift", false);
    const double drift_rate = doc.number("scenario.drift_rate", 0.5);
    p.drift_rate = drift ? drift_rate : 0.0;
    if (doc.has("scenario.drift_direction")) {
        const std::vector<double> d = doc.numbers("scenario.drift_direction");
        if (d.size() != 3 || Vec3(d[0], d[1], d[2]).norm() < 1e-12) {
            throw ConfigError("scenario.drift_direction must be a non-zero [x, y, z] vector", "scenario.drift_direction");
        }
        p.drift_direction = Vec3(d[0], d[1], d[2]).normalized();
    }

    s.control.relative = doc.number("control.relative_threshold", s.control.relative);
    s.control.absolute_floor = doc.number("control.absolute_floor", s.control.absolute_floor);
    s.control.lowering_increment = doc.number("control.lowering_increment", s.control.lowering_increment);
    s.control.max_extend = doc.number("control.max_extend", s.control.max_extend);

    s.compensation_params.weight = doc.number("compensation.weight", s.compensation_params.weight);
    s.compensation_params.tol = doc.number("compensation.tol", s.compensation_params.tol);
    s.compensation_params.max_iters = doc.integer("compensation.max_iters", s.compensation_params.max_iters);
    s.compensation_params.height_scale = doc.number("compensation.height_scale", s.compensation_params.height_scale);

    const std::vector<std::string> unknown = doc.unused_keys();
    if (!unknown.empty()) {
        const int line = doc.values().at(unknown.front()).line;
        throw ConfigError(doc.source() + ":" + std::to_string(line) + ": unknown key " + unknown.front(),
                          unknown.front(), line);
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_document(ConfigDocument::load(path), path.parent_path());
}

Scenario with_parameter(const std::filesystem::path& path, const std::string& key, double value) {
    ConfigDocument doc = ConfigDocument::load(path);
    if (doc.has(key) && !doc.values().at(key).is_number()) {
        throw ConfigError(key + " is not a numeric setting", key);
    }
    doc.set_number(key, value);
    return scenario_from_document(doc, path.parent_path());
}

}  // namespace hexapod::harness
