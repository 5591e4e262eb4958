#pragma once

#include <array>
#include <string>

#include "hexapod/core_math.hpp"

namespace hexapod {

inline constexpr int kLegCount = 6;

/// Leg indices. Right side first, front to rear, then the mirrored left side.
enum LegId : int {
    kRightFront = 0,
    kRightMiddle = 1,
    kRightRear = 2,
    kLeftFront = 3,
    kLeftMiddle = 4,
    kLeftRear = 5,
};

std::string leg_name(int leg);
/// Two-letter code: RF RM RR LF LM LR.
std::string leg_code(int leg);

struct LegMount {
    double x = 0.0;        ///< coxa joint position, body frame (mm)
    double y = 0.0;        ///< coxa joint position, body frame (mm)
    double epsilon = 0.0;  ///< mount orientation of the coxa servo (rad)
    Vec3 shoulder = Vec3::Zero();  ///< terrain-compensation interest point, body frame (mm)
    Vec3 neutral = Vec3::Zero();   ///< neutral-position endpoint, body frame (mm)
};

/// Mass properties of one rigid link, expressed in the link frame.
struct LinkInertial {
    double mass = 0.0;                     ///< kg
    Vec3 com = Vec3::Zero();               ///< mm, link frame
    Mat3 inertia_com = Mat3::Zero();       ///< kg mm^2 about the COM, link frame

    /// 6x6 spatial inertia about the link-frame origin, (linear, angular) ordering.
    Mat6 spatial_inertia() const;
};

struct RobotGeometry {
    std::array<LegMount, kLegCount> legs{};
    double coxa_length = 0.0;   ///< l_c (mm)
    double femur_length = 0.0;  ///< l_f (mm)
    double tibia_length = 0.0;  ///< l_t (mm)

    LinkInertial body;
    LinkInertial coxa;
    LinkInertial femur;
    LinkInertial tibia;

    Vec3 gravity{0.0, 0.0, -9810.0};  ///< mm/s^2
    Vec3 start_position = Vec3::Zero();  ///< SP (mm)
    double joint_limit = 5.0 * 3.14159265358979323846 / 6.0;  ///< symmetric actuator limit (rad)

    /// PhantomX-class placeholder dimensions: l_c=52, l_f=66, l_t=133 mm, 240x120 mm
    /// joint rectangle, neutral feet 130 mm radially out from each coxa joint at
    /// SP_z = 100 mm below the body.
    static RobotGeometry phantomx_defaults();

    /// Places every neutral endpoint `radial` mm out from its coxa joint along the
    /// mount direction, on the ground plane below a body at SP_z.
    void set_radial_neutral(double radial);

    double total_mass() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Coxa frame in body frame: Rz(epsilon + theta), origin at the coxa joint.
Transform4 body_coxa(const RobotGeometry& geom, int leg, double theta);
/// Femur frame in coxa frame: Ry(phi), origin l_c along coxa x.
Transform4 coxa_femur(const RobotGeometry& geom, double phi);
/// Tibia frame in femur frame: Ry(psi), origin l_f along femur x.
Transform4 femur_tibia(const RobotGeometry& geom, double psi);

/// Leg frame in body frame: origin at the coxa joint, y and z flipped.
Transform4 body_to_leg(const RobotGeometry& geom, int leg);

void require_leg_index(int leg);

}  // namespace hexapod
