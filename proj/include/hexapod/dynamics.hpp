#pragma once

// Constrained Lagrangian model of the whole robot.
//
// Generalized coordinates X = (X_a, X_b): the 18 joint angles, leg-major
// (theta, phi, psi per leg), followed by the body pose (x, y, z, rot_x, rot_y, rot_z).
// Mass matrices are in kg mm^2; torques and energies in N mm.

#include <array>
#include <optional>

#include "hexapod/core_math.hpp"
#include "hexapod/geometry.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod {

constexpr int kActuatorCount = 3 * kLegCount;
constexpr int kStateSize = kActuatorCount + 6;

/// kg mm^2 / s^2 -> N mm
constexpr double kEnergyToNmm = 1e-3;

using Vec18 = Eigen::Matrix<double, kActuatorCount, 1>;
using Vec24 = Eigen::Matrix<double, kStateSize, 1>;
using Mat24 = Eigen::Matrix<double, kStateSize, kStateSize>;
using ConstraintA = Eigen::Matrix<double, kActuatorCount, 6>;
using ConstraintB = Eigen::Matrix<double, kActuatorCount, kActuatorCount>;
using TorqueVector = Vec18;

using ContactFlags = std::array<bool, kLegCount>;

struct BodyState {
    Vec6 pose = Vec6::Zero();  ///< x, y, z (mm), rot_x, rot_y, rot_z (rad)
    Vec6 rate = Vec6::Zero();
    Vec6 accel = Vec6::Zero();
};

struct ActuatorState {
    Vec18 angles = Vec18::Zero();
    Vec18 rate = Vec18::Zero();
    Vec18 accel = Vec18::Zero();

    JointAngles leg(int leg) const;
    void set_leg(int leg, const JointAngles& a);
};

/// Full generalized state with rates and accelerations.
struct RobotState {
    ActuatorState actuators;
    BodyState body;

    Vec24 q() const;
    Vec24 qd() const;
    Vec24 qdd() const;
    static RobotState from_vectors(const Vec24& q, const Vec24& qd = Vec24::Zero(), const Vec24& qdd = Vec24::Zero());
};

/// World transform of the body for pose (x, y, z, rot_x, rot_y, rot_z).
Transform4 body_transform(const Vec6& pose);

/// Rotation axes (unit, world frame) and their application points, plus the foot position.
struct JointAxes {
    Vec3 coxa_axis, femur_axis, tibia_axis;
    Vec3 coxa_origin, femur_origin, tibia_origin;
    Vec3 foot;
};

JointAxes joint_axes(const Vec24& q, const RobotGeometry& geom, int leg);

struct LegConstraint {
    Eigen::Matrix<double, 3, 6> body;    ///< foot velocity per body DOF rate
    Mat3 actuated;                       ///< foot velocity per joint rate of this leg
};

/// Grounded-foot velocity constraint of one leg: body * Xb_dot + actuated * Xa_leg_dot = 0.
LegConstraint leg_constraints(const Vec24& q, const RobotGeometry& geom, int leg);

struct ConstraintMatrices {
    ConstraintA a = ConstraintA::Zero();
    ConstraintB b = ConstraintB::Zero();
};

ConstraintMatrices assemble_constraints(const std::array<LegConstraint, kLegCount>& legs, const ContactFlags& flags);
ConstraintMatrices assemble_constraints(const Vec24& q, const RobotGeometry& geom, const ContactFlags& flags);

/// Joint-space inertia over the full state, kg mm^2. Rows 0..17 form the actuated
/// partition, rows 18..23 the body partition.
Mat24 mass_matrix(const Vec24& q, const RobotGeometry& geom);

/// N mm
double kinetic_energy(const Vec24& q, const Vec24& qd, const RobotGeometry& geom);

/// U = -g^T sum(m_k p_k) over the 19 link centres of mass, N mm.
double potential_energy(const Vec24& q, const RobotGeometry& geom);

/// dU/dX, analytic.
Vec24 gravity_torque(const Vec24& q, const RobotGeometry& geom);

/// Velocity-product term C(X, Xdot) Xdot, from central differences of the mass matrix.
Vec24 velocity_product(const Vec24& q, const Vec24& qd, const RobotGeometry& geom);

struct TorqueComponents {
    Vec18 actuated = Vec18::Zero();  ///< tau_a
    Vec6 body = Vec6::Zero();        ///< tau_b
};

TorqueComponents torque_components(const RobotState& state, const RobotGeometry& geom);

/// Independent reference: Euler-Lagrange equations evaluated by finite differences of
/// T and U along the trajectory through (X, Xdot, Xddot).
TorqueComponents fd_lagrangian_oracle(const RobotState& state, const RobotGeometry& geom);

/// -A_c^+ B_c. Throws RankDeficiencyError when A_c lacks full column rank.
Eigen::Matrix<double, 6, kActuatorCount> torque_projection(const ConstraintMatrices& c);

/// tau = tau_a + (-A_c^+ B_c)^T tau_b.
TorqueVector actuator_torque(const Vec18& tau_a, const Vec6& tau_b, const ConstraintMatrices& c);
TorqueVector actuator_torque(const TorqueComponents& t, const ConstraintMatrices& c);

/// Ground reaction on each grounded foot (N, world frame) implied by the actuator torques.
std::array<Vec3, kLegCount> contact_forces(const TorqueVector& tau, const Vec18& tau_a, const Vec24& q,
                                           const RobotGeometry& geom, const ContactFlags& flags);

/// Actuator-torque evaluation that survives rank-deficient support: it reuses the last
/// valid projection and reports the fallback.
class TorqueEstimator {
public:
    TorqueVector estimate(const TorqueComponents& t, const ConstraintMatrices& c);
    bool last_fell_back() const { return fell_back_; }
    int fallback_count() const { return fallback_count_; }

private:
    std::optional<Eigen::Matrix<double, 6, kActuatorCount>> projection_;
    bool fell_back_ = false;
    int fallback_count_ = 0;
};

int grounded_count(const ContactFlags& flags);

}  // namespace hexapod
