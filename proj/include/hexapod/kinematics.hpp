#pragma once

#include <array>
#include <span>

#include "hexapod/core_math.hpp"
#include "hexapod/geometry.hpp"

namespace hexapod {

class TerrainModel;

struct JointAngles {
    double theta = 0.0;  ///< coxa
    double phi = 0.0;    ///< femur, positive lowers the femur
    double psi = 0.0;    ///< tibia, positive bends the knee downward
};

enum class Frame { Global, Body, Leg };

struct LegEndpoint {
    Vec3 position = Vec3::Zero();
    Frame frame = Frame::Body;
};

/// User-imposed body pose on top of the gait motion (Mov * RotZ * RotY * RotX).
struct UserPose {
    Vec3 position = Vec3::Zero();
    double rot_x = 0.0;
    double rot_y = 0.0;
    double rot_z = 0.0;

    Transform4 transform() const;
};

/// Incremental gait motion of one tick, expressed in the current gait frame.
struct GaitDelta {
    double dx = 0.0;
    double dy = 0.0;
    double drot_z = 0.0;
};

/// Absolute swing displacement from the neutral position.
struct SwingDisplacement {
    double x = 0.0;
    double y = 0.0;
    double rot_z = 0.0;
};

/// Global-to-body transform chain maintained tick by tick.
struct BodyChainState {
    Transform4 gait;       ///< T_tr, gait-only accumulated motion
    Transform4 terrain;    ///< Q_ter
    UserPose user;
    Transform4 global_body;       ///< T_gb = T_tr * Q_ter * Mov * RotZ * RotY * RotX
    Transform4 prev_global_body;  ///< T_gb of the previous tick

    /// Chain at rest at the starting position SP.
    static BodyChainState at_start(const Vec3& start_position);
};

/// Inverse kinematics of one leg for an endpoint given in that leg's frame.
/// Throws ReachabilityError when the endpoint lies outside the annulus
/// |l_f - l_t| <= im <= l_f + l_t, behind the coxa, or when an angle exceeds the
/// actuator limit.
JointAngles leg_ik(const LegEndpoint& endpoint, const RobotGeometry& geom, int leg);

/// Forward kinematics; the result is in the leg frame.
LegEndpoint leg_fk(const JointAngles& angles, const RobotGeometry& geom, int leg);

/// Tibia-tip position in the body frame.
Vec3 foot_in_body(const JointAngles& angles, const RobotGeometry& geom, int leg);

/// Body-frame endpoint -> angles, through the body-to-leg transform.
JointAngles body_endpoint_ik(const Vec3& body_point, const RobotGeometry& geom, int leg);

LegEndpoint to_leg_frame(const LegEndpoint& body_point, const RobotGeometry& geom, int leg);
LegEndpoint to_body_frame(const LegEndpoint& leg_point, const RobotGeometry& geom, int leg);

/// Advances the chain by one tick: T_tr <- T_tr * dT_mov * dRotZ, then rebuilds T_gb.
BodyChainState advance_chain(const BodyChainState& state, const GaitDelta& delta, const UserPose& user,
                             const Transform4& terrain);

/// Rebuilds T_gb from its factors.
Transform4 compose_global_body(const Transform4& gait, const Transform4& terrain, const UserPose& user);

/// Q_body = T_gb,i-1^-1 * T_gb,i.
Transform4 body_increment(const BodyChainState& state);

/// Pushing endpoints stay fixed on the ground: each body-frame endpoint p <- Q_body^-1 p.
void update_push_endpoints(std::span<Vec3> endpoints, const Transform4& body_increment);
Vec3 update_push_endpoint(const Vec3& endpoint, const Transform4& body_increment);

/// Swing target: the neutral endpoint displaced by the absolute swing displacement,
/// lifted to z_gait above the terrain, mapped back to the body frame.
/// `extra_height` is added on top of the terrain elevation (lift-off clearance).
Vec3 place_swing_endpoint(const Vec3& neutral, const BodyChainState& state, const SwingDisplacement& disp,
                          double z_gait, const TerrainModel& terrain, double extra_height = 0.0);

/// Global position of a swing target before the terrain height correction.
Vec3 swing_global_xy(const Vec3& neutral, const BodyChainState& state, const SwingDisplacement& disp);

}  // namespace hexapod
