#include "hexapod/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hexapod/errors.hpp"
#include "hexapod/terrain.hpp"

namespace hexapod {

namespace {

constexpr double kReachSlack = 1e-9;

double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

void check_limit(double angle, double limit, const char* name) {
    if (std::abs(angle) > limit + 1e-12) {
        throw ReachabilityError(std::string(name) + " angle " + std::to_string(angle) +
                                    " rad exceeds the actuator limit",
                                std::string(name) + "_limit", angle, limit);
    }
}

}  // namespace

Transform4 UserPose::transform() const {
    return {rotation_zyx(rot_x, rot_y, rot_z), position};
}

BodyChainState BodyChainState::at_start(const Vec3& start_position) {
    BodyChainState s;
    s.gait = translation(start_position);
    s.terrain = Transform4::identity();
    s.global_body = s.gait;
    s.prev_global_body = s.gait;
    return s;
}

JointAngles leg_ik(const LegEndpoint& endpoint, const RobotGeometry& geom, int leg) {
    require_leg_index(leg);
    if (endpoint.frame != Frame::Leg) {
        throw InvalidArgument("leg_ik expects an endpoint in the leg frame");
    }
    const double x = endpoint.position.x();
    const double y = endpoint.position.y();
    const double z = endpoint.position.z();
    if (!endpoint.position.allFinite()) {
        throw InvalidArgument("leg endpoint must be finite");
    }
    const double lf = geom.femur_length;
    const double lt = geom.tibia_length;

    const double true_x = std::hypot(x, y) - geom.coxa_length;
    if (true_x < 0.0) {
        throw ReachabilityError("endpoint lies behind the coxa", "behind_coxa", true_x, 0.0);
    }
    const double im = std::hypot(true_x, z);
    const double max_reach = lf + lt;
    const double min_reach = std::abs(lf - lt);
    if (im > max_reach + kReachSlack) {
        throw ReachabilityError("endpoint beyond maximum leg extension", "max_reach", im, max_reach);
    }
    if (im < min_reach - kReachSlack || im <= 0.0) {
        throw ReachabilityError("endpoint inside minimum leg reach", "min_reach", im, min_reach);
    }

    const double eps = geom.legs[static_cast<std::size_t>(leg)].epsilon;
    JointAngles a;
    a.theta = wrap_angle(-std::atan2(y, x) - eps);
    a.phi = std::numbers::pi / 2 - std::atan2(true_x, z) - clamped_acos((lf * lf + im * im - lt * lt) / (2 * im * lf));
    a.psi = std::numbers::pi - clamped_acos((lf * lf + lt * lt - im * im) / (2 * lf * lt));
    a.phi = wrap_angle(a.phi);

    check_limit(a.theta, geom.joint_limit, "theta");
    check_limit(a.phi, geom.joint_limit, "phi");
    check_limit(a.psi, geom.joint_limit, "psi");
    return a;
}

Vec3 foot_in_body(const JointAngles& angles, const RobotGeometry& geom, int leg) {
    const Transform4 chain =
        body_coxa(geom, leg, angles.theta) * coxa_femur(geom, angles.phi) * femur_tibia(geom, angles.psi);
    return chain.apply(Vec3(geom.tibia_length, 0.0, 0.0));
}

LegEndpoint leg_fk(const JointAngles& angles, const RobotGeometry& geom, int leg) {
    require_leg_index(leg);
    const Vec3 body = foot_in_body(angles, geom, leg);
    return {body_to_leg(geom, leg).inverse().apply(body), Frame::Leg};
}

LegEndpoint to_leg_frame(const LegEndpoint& body_point, const RobotGeometry& geom, int leg) {
    if (body_point.frame != Frame::Body) {
        throw InvalidArgument("expected a body-frame endpoint");
    }
    return {body_to_leg(geom, leg).inverse().apply(body_point.position), Frame::Leg};
}

LegEndpoint to_body_frame(const LegEndpoint& leg_point, const RobotGeometry& geom, int leg) {
    if (leg_point.frame != Frame::Leg) {
        throw InvalidArgument("expected a leg-frame endpoint");
    }
    return {body_to_leg(geom, leg).apply(leg_point.position), Frame::Body};
}

JointAngles body_endpoint_ik(const Vec3& body_point, const RobotGeometry& geom, int leg) {
    return leg_ik(to_leg_frame({body_point, Frame::Body}, geom, leg), geom, leg);
}

Transform4 compose_global_body(const Transform4& gait, const Transform4& terrain, const UserPose& user) {
    return gait * terrain * user.transform();
}

BodyChainState advance_chain(const BodyChainState& state, const GaitDelta& delta, const UserPose& user,
                             const Transform4& terrain) {
    BodyChainState next = state;
    next.prev_global_body = state.global_body;
    next.gait = state.gait * translation(delta.dx, delta.dy, 0.0) * rotation(Axis::Z, delta.drot_z);
    next.terrain = terrain;
    next.user = user;
    next.global_body = compose_global_body(next.gait, next.terrain, next.user);
    return next;
}

Transform4 body_increment(const BodyChainState& state) {
    return state.prev_global_body.inverse() * state.global_body;
}

Vec3 update_push_endpoint(const Vec3& endpoint, const Transform4& body_increment) {
    return body_increment.inverse().apply(endpoint);
}

void update_push_endpoints(std::span<Vec3> endpoints, const Transform4& body_increment) {
    const Transform4 inv = body_increment.inverse();
    for (Vec3& p : endpoints) {
        p = inv.apply(p);
    }
}

Vec3 swing_global_xy(const Vec3& neutral, const BodyChainState& state, const SwingDisplacement& disp) {
    const Transform4 placement = state.gait * state.terrain * rotation(Axis::Z, disp.rot_z) *
                                 translation(disp.x, disp.y, 0.0);
    return placement.apply(neutral);
}

Vec3 place_swing_endpoint(const Vec3& neutral, const BodyChainState& state, const SwingDisplacement& disp,
                          double z_gait, const TerrainModel& terrain, double extra_height) {
    Vec3 global = swing_global_xy(neutral, state, disp);
    global.z() = z_gait + elevation(terrain, global.x(), global.y()) + extra_height;
    return state.global_body.inverse().apply(global);
}

}  // namespace hexapod
