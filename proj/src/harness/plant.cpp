#include "hexapod/harness/plant.hpp"

#include <cmath>
#include <limits>

#include "hexapod/errors.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod::harness {

void PlantParams::validate() const {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string(field) + " " + what, field);
    };
    require(servo_tau >= 0.0 && std::isfinite(servo_tau), "scenario.servo_tau", "must be non-negative");
    require(servo_deadband >= 0.0 && std::isfinite(servo_deadband), "scenario.servo_deadband",
            "must be non-negative");
    require(dt > 0.0 && std::isfinite(dt), "scenario.tick_rate", "must be positive");
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "scenario.noise_sigma", "must be non-negative");
    require(contact_threshold >= 0.0, "scenario.contact_threshold", "must be non-negative");
    require(release_threshold >= contact_threshold, "scenario.release_threshold",
            "must not be below scenario.contact_threshold");
    require(stop_tolerance > 0.0, "scenario.stop_tolerance", "must be positive");
    require(drift_rate >= 0.0 && std::isfinite(drift_rate), "scenario.drift_rate", "must be non-negative");
    require(drift_direction.allFinite(), "scenario.drift_direction", "must be finite");
    require(max_tilt > 0.0, "scenario.max_tilt", "must be positive");
}

double foot_clearance(const Transform4& pose, const Vec3& foot_body, const TerrainModel& terrain, const Vec3& shift) {
    const Vec3 g = pose.apply(foot_body) + shift;
    return g.z() - elevation(terrain, g.x(), g.y());
}

Vec6 pose_vector(const Transform4& t) {
    Vec6 p;
    p.head<3>() = t.translation();
    p.tail<3>() = euler_zyx(t.rotation());
    return p;
}

namespace {

struct SupportPlane {
    double lift = 0.0;  ///< vertical move at the body origin
    double slope_x = 0.0;
    double slope_y = 0.0;
};

// Lowest plane lift(r) = lift + slope_x r_x + slope_y r_y that keeps every foot at or above
// its required lift. The optimum of this small LP sits on a vertex: three active feet, or the
// horizontal plane through the highest requirement.
SupportPlane support_plane(const std::vector<Vec3>& offsets, const std::vector<double>& need, double max_tilt) {
    const std::size_t n = offsets.size();
    SupportPlane best;
    best.lift = -std::numeric_limits<double>::infinity();
    for (double d : need) best.lift = std::max(best.lift, d);
    if (n < 3) return best;

    auto feasible = [&](const SupportPlane& p) {
        for (std::size_t i = 0; i < n; ++i) {
            if (p.lift + p.slope_x * offsets[i].x() + p.slope_y * offsets[i].y() < need[i] - 1e-9) return false;
        }
        return std::abs(p.slope_x) <= max_tilt && std::abs(p.slope_y) <= max_tilt;
    };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            for (std::size_t c = b + 1; c < n; ++c) {
                Mat3 m;
                m << 1, offsets[a].x(), offsets[a].y(), 1, offsets[b].x(), offsets[b].y(), 1, offsets[c].x(),
                    offsets[c].y();
                if (std::abs(m.determinant()) < 1e-6) continue;
                const Vec3 s = m.partialPivLu().solve(Vec3(need[a], need[b], need[c]));
                const SupportPlane p{s[0], s[1], s[2]};
                if (!feasible(p)) continue;
                const double tilt = p.slope_x * p.slope_x + p.slope_y * p.slope_y;
                const double best_tilt = best.slope_x * best.slope_x + best.slope_y * best.slope_y;
                if (p.lift < best.lift - 1e-9 || (p.lift < best.lift + 1e-9 && tilt < best_tilt)) best = p;
            }
        }
    }
    return best;
}

}  // namespace

Transform4 settle_body(const Transform4& pose, const std::vector<Vec3>& feet, const TerrainModel& terrain,
                       double max_tilt, const std::vector<Vec3>& shifts) {
    if (!shifts.empty() && shifts.size() != feet.size()) {
        throw InvalidArgument("settle_body needs one shift per foot");
    }
    Transform4 body = pose;
    if (feet.empty()) return body;
    for (int iter = 0; iter < 4; ++iter) {
        const Vec3 origin = body.translation();
        std::vector<Vec3> offsets;
        std::vector<double> need;
        for (std::size_t i = 0; i < feet.size(); ++i) {
            const Vec3 g = body.apply(feet[i]);
            offsets.push_back(g - origin);
            const Vec3 w = shifts.empty() ? g : Vec3(g + shifts[i]);
            need.push_back(elevation(terrain, w.x(), w.y()) - w.z());
        }
        const SupportPlane p = support_plane(offsets, need, max_tilt);
        if (std::abs(p.lift) < 1e-9 && std::abs(p.slope_x) < 1e-12 && std::abs(p.slope_y) < 1e-12) break;
        const Transform4 tilt = translation(origin) * rotation(Axis::X, std::atan(p.slope_y)) *
                                rotation(Axis::Y, -std::atan(p.slope_x)) * translation(-origin);
        body = tilt * translation(0.0, 0.0, p.lift) * body;
    }
    return body;
}

namespace {

JointAngles leg_angles(const Vec18& a, int leg) { return {a[3 * leg], a[3 * leg + 1], a[3 * leg + 2]}; }

Vec3 foot(const Vec18& a, const RobotGeometry& geom, int leg) { return foot_in_body(leg_angles(a, leg), geom, leg); }

void evaluate_torques(PlantState& s, const RobotGeometry& geom, const PlantParams& params, std::mt19937_64& rng,
                      TorqueEstimator& estimator, bool first) {
    Vec24 q;
    q.head<kActuatorCount>() = s.actual;
    q.tail<6>() = pose_vector(s.body);
    Vec24 qd = Vec24::Zero();
    Vec24 qdd = Vec24::Zero();
    if (params.dynamic_torques && !first) {
        qd = (q - s.q_prev) / params.dt;
        qdd = (qd - s.qd_prev) / params.dt;
    }
    s.q_prev = q;
    s.qd_prev = qd;
    const TorqueComponents tc = torque_components(RobotState::from_vectors(q, qd, qdd), geom);
    s.torques = estimator.estimate(tc, assemble_constraints(q, geom, s.grounded));
    s.sensed = s.torques;
    if (params.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (int j = 0; j < kActuatorCount; ++j) s.sensed[j] += noise(rng);
    }
}

std::vector<Vec3> all_feet(const Vec18& a, const RobotGeometry& geom) {
    std::vector<Vec3> out;
    for (int l = 0; l < kLegCount; ++l) out.push_back(foot(a, geom, l));
    return out;
}

}  // namespace

PlantTickResult plant_tick(const PlantState& state, const Vec18& commanded, const Transform4& planned,
                           const TerrainModel& true_terrain, const RobotGeometry& geom, const PlantParams& params,
                           std::mt19937_64& rng, TorqueEstimator& estimator) {
    PlantState s = state;
    s.tick = state.tick + 1;
    s.new_contacts.clear();
    // Odometry error builds up while the body is being moved, not while it stands.
    const bool body_moved = (planned.matrix() - state.planned.matrix()).cwiseAbs().maxCoeff() > 1e-9;
    s.drift = body_moved ? Vec3(state.drift + params.drift_rate * params.drift_direction) : state.drift;
    std::vector<Vec3> shift(kLegCount);
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        shift[i] = state.grounded[i] ? state.foot_shift[i] : s.drift;
    }

    // Carry the previous support correction forward to locate feet during the servo move.
    const Transform4 estimate = state.body * state.planned.inverse() * planned;

    const double k = params.lag_gain();
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        const auto seg = Eigen::seqN(3 * l, 3);
        const bool changed = (commanded(seg) - state.requested(seg)).cwiseAbs().maxCoeff() > 1e-6;
        if (s.stopped[i] && changed) {
            const bool descending = foot(commanded, geom, l).z() < foot(state.requested, geom, l).z() - 1e-6;
            if (!(s.contact_hold[i] && descending)) {
                s.stopped[i] = false;
                s.contact_hold[i] = false;
            }
        }
        s.commanded(seg) = s.stopped[i] ? state.commanded(seg) : commanded(seg);
        const Eigen::Vector3d from = state.actual(seg);
        // A loaded foot that is kept on the ground follows its command; anything else lags.
        const bool planted =
            state.grounded[i] &&
            foot_clearance(estimate, foot(s.commanded, geom, l), true_terrain, shift[i]) <= params.contact_threshold;
        Eigen::Vector3d to = planted ? Eigen::Vector3d(s.commanded(seg))
                                     : Eigen::Vector3d(from + k * (s.commanded(seg) - from));
        if ((foot(s.commanded, geom, l) - foot_in_body({to[0], to[1], to[2]}, geom, l)).norm() < params.servo_deadband) {
            to = s.commanded(seg);
        }
        s.actual(seg) = to;
    }

    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        if (state.grounded[i]) continue;
        const auto seg = Eigen::seqN(3 * l, 3);
        const Eigen::Vector3d from = state.actual(seg);
        const Eigen::Vector3d to = s.actual(seg);

        // A foot moving into the ground stops where it meets it.
        auto clearance_at = [&](double t) {
            const Eigen::Vector3d a = from + t * (to - from);
            return foot_clearance(estimate, foot_in_body({a[0], a[1], a[2]}, geom, l), true_terrain, shift[i]);
        };
        if (clearance_at(0.0) >= 0.0 && clearance_at(1.0) < 0.0) {
            double lo = 0.0;
            double hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                (clearance_at(mid) >= 0.0 ? lo : hi) = mid;
            }
            s.actual(seg) = from + lo * (to - from);
            s.grounded[i] = true;
            // Servos hold at the contact until the next command arrives.
            s.commanded(seg) = s.actual(seg);
            s.stopped[i] = true;
            s.contact_hold[i] = true;
        }
    }

    s.requested = commanded;
    s.planned = planned;
    s.body = settle_body(planned, all_feet(s.actual, geom), true_terrain, params.max_tilt, shift);
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        const double c = foot_clearance(s.body, foot(s.actual, geom, l), true_terrain, shift[i]);
        const bool touching = c <= params.contact_threshold || ((state.grounded[i] || s.grounded[i]) &&
                                                                c <= params.release_threshold);
        if (touching && !state.grounded[i]) {
            s.new_contacts.push_back(l);
            // Reaching the ground without crossing it still stops the servos there.
            const auto seg = Eigen::seqN(3 * l, 3);
            s.commanded(seg) = s.actual(seg);
            s.stopped[i] = true;
            s.contact_hold[i] = true;
        }
        s.grounded[i] = touching;
        s.foot_shift[i] = touching && state.grounded[i] ? state.foot_shift[i] : s.drift;
        s.moving[i] = (foot(s.commanded, geom, l) - foot(s.actual, geom, l)).norm() > params.stop_tolerance;
    }
    evaluate_torques(s, geom, params, rng, estimator, false);
    return {s, s.sensed, s.actual};
}

Plant::Plant(RobotGeometry geom, TerrainModel true_terrain, PlantParams params, std::uint64_t seed)
    : geom_(std::move(geom)), terrain_(std::move(true_terrain)), params_(params), rng_(seed) {
    params_.validate();
}

void Plant::reset(const Vec18& angles, const Transform4& planned) {
    state_ = PlantState{};
    state_.commanded = angles;
    state_.requested = angles;
    state_.actual = angles;
    state_.planned = planned;
    state_.body = settle_body(planned, all_feet(angles, geom_), terrain_, params_.max_tilt);
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        state_.grounded[i] = foot_clearance(state_.body, foot(angles, geom_, l), terrain_) <= params_.contact_threshold;
    }
    evaluate_torques(state_, geom_, params_, rng_, estimator_, true);
}

void Plant::step(const Vec18& commanded, const Transform4& planned) {
    state_ = plant_tick(state_, commanded, planned, terrain_, geom_, params_, rng_, estimator_).state;
}

SensorReading Plant::read(long) {
    SensorReading r;
    r.torques = state_.sensed;
    r.angles = state_.actual;
    r.moving = state_.moving;
    return r;
}

void Plant::stop_leg(int leg) {
    require_leg_index(leg);
    const auto seg = Eigen::seqN(3 * leg, 3);
    state_.commanded(seg) = state_.actual(seg);
    state_.stopped[static_cast<std::size_t>(leg)] = true;
    state_.contact_hold[static_cast<std::size_t>(leg)] = false;
    state_.moving[static_cast<std::size_t>(leg)] = false;
}

}  // namespace hexapod::harness
