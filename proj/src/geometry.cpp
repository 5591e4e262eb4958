#include "hexapod/geometry.hpp"

#include <cmath>
#include <numbers>

#include "hexapod/errors.hpp"

namespace hexapod {

std::string leg_name(int leg) {
    static const std::array<const char*, kLegCount> names = {
        "right_front", "right_middle", "right_rear", "left_front", "left_middle", "left_rear"};
    require_leg_index(leg);
    return names[static_cast<std::size_t>(leg)];
}

std::string leg_code(int leg) {
    static const std::array<const char*, kLegCount> codes = {"RF", "RM", "RR", "LF", "LM", "LR"};
    require_leg_index(leg);
    return codes[static_cast<std::size_t>(leg)];
}

void require_leg_index(int leg) {
    if (leg < 0 || leg >= kLegCount) {
        throw InvalidArgument("leg index " + std::to_string(leg) + " out of range [0, 6)");
    }
}

Mat6 LinkInertial::spatial_inertia() const {
    const Mat3 c = skew(com);
    Mat6 m = Mat6::Zero();
    m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
    m.topRightCorner<3, 3>() = -mass * c;
    m.bottomLeftCorner<3, 3>() = mass * c;
    m.bottomRightCorner<3, 3>() = inertia_com + mass * c.transpose() * c;
    return m;
}

RobotGeometry RobotGeometry::phantomx_defaults() {
    using std::numbers::pi;
    RobotGeometry g;
    g.coxa_length = 52.0;
    g.femur_length = 66.0;
    g.tibia_length = 133.0;

    const std::array<double, kLegCount> xs = {120.0, 0.0, -120.0, 120.0, 0.0, -120.0};
    const std::array<double, kLegCount> ys = {-60.0, -60.0, -60.0, 60.0, 60.0, 60.0};
    const std::array<double, kLegCount> eps = {-pi / 4, -pi / 2, -3 * pi / 4, pi / 4, pi / 2, 3 * pi / 4};
    for (std::size_t i = 0; i < g.legs.size(); ++i) {
        g.legs[i].x = xs[i];
        g.legs[i].y = ys[i];
        g.legs[i].epsilon = eps[i];
        g.legs[i].shoulder = Vec3(xs[i], ys[i], 0.0);
    }

    g.body.mass = 1.2;
    g.body.inertia_com = Vec3(1600.0, 5920.0, 7200.0).asDiagonal();
    g.coxa.mass = 0.03;
    g.coxa.com = Vec3(26.0, 0.0, 0.0);
    g.coxa.inertia_com = Vec3(2.0, 6.8, 6.8).asDiagonal();
    g.femur.mass = 0.07;
    g.femur.com = Vec3(33.0, 0.0, 0.0);
    g.femur.inertia_com = Vec3(5.0, 25.0, 25.0).asDiagonal();
    g.tibia.mass = 0.05;
    g.tibia.com = Vec3(66.5, 0.0, 0.0);
    g.tibia.inertia_com = Vec3(5.0, 74.0, 74.0).asDiagonal();

    g.start_position = Vec3(0.0, 0.0, 100.0);
    g.set_radial_neutral(130.0);
    return g;
}

void RobotGeometry::set_radial_neutral(double radial) {
    for (auto& leg : legs) {
        leg.neutral = Vec3(leg.x + radial * std::cos(leg.epsilon), leg.y + radial * std::sin(leg.epsilon),
                           -start_position.z());
    }
}

double RobotGeometry::total_mass() const {
    return body.mass + kLegCount * (coxa.mass + femur.mass + tibia.mass);
}

namespace {

void check_link(const LinkInertial& link, const std::string& name) {
    if (!(link.mass > 0.0) || !std::isfinite(link.mass)) {
        throw ConfigError("robot." + name + "_mass must be positive", "robot." + name + "_mass");
    }
    if (!link.com.allFinite()) {
        throw ConfigError("robot." + name + "_com must be finite", "robot." + name + "_com");
    }
    const Mat3& i = link.inertia_com;
    if (!i.allFinite() || (i - i.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ConfigError("robot." + name + "_inertia must be symmetric", "robot." + name + "_inertia");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(i);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw ConfigError("robot." + name + "_inertia must be positive semi-definite",
                          "robot." + name + "_inertia");
    }
}

}  // namespace

void RobotGeometry::validate() const {
    const std::pair<double, const char*> lengths[] = {
        {coxa_length, "robot.l_c"}, {femur_length, "robot.l_f"}, {tibia_length, "robot.l_t"}};
    for (const auto& [value, field] : lengths) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ConfigError(std::string(field) + " must be positive", field);
        }
    }
    check_link(body, "body");
    check_link(coxa, "coxa");
    check_link(femur, "femur");
    check_link(tibia, "tibia");
    if (!gravity.allFinite()) {
        throw ConfigError("robot.gravity must be finite", "robot.gravity");
    }
    if (!start_position.allFinite() || !(start_position.z() > 0.0)) {
        throw ConfigError("robot.start_position must be finite with positive z", "robot.start_position");
    }
    if (!(joint_limit > 0.0) || joint_limit > std::numbers::pi) {
        throw ConfigError("robot.joint_limit must lie in (0, pi]", "robot.joint_limit");
    }
    // Left legs mirror the right ones: (x, y, eps) -> (x, -y, -eps).
    for (int i = 0; i < 3; ++i) {
        const LegMount& r = legs[static_cast<std::size_t>(i)];
        const LegMount& l = legs[static_cast<std::size_t>(i + 3)];
        const bool mirrored = std::abs(r.x - l.x) < 1e-9 && std::abs(r.y + l.y) < 1e-9 &&
                              std::abs(wrap_angle(r.epsilon + l.epsilon)) < 1e-9;
        if (!mirrored) {
            throw ConfigError("legs " + leg_name(i) + " and " + leg_name(i + 3) + " are not mirror-symmetric",
                              "robot.mount");
        }
    }
}

Transform4 body_coxa(const RobotGeometry& geom, int leg, double theta) {
    const LegMount& m = geom.legs[static_cast<std::size_t>(leg)];
    return {rotation_matrix(Axis::Z, m.epsilon + theta), Vec3(m.x, m.y, 0.0)};
}

Transform4 coxa_femur(const RobotGeometry& geom, double phi) {
    return {rotation_matrix(Axis::Y, phi), Vec3(geom.coxa_length, 0.0, 0.0)};
}

Transform4 femur_tibia(const RobotGeometry& geom, double psi) {
    return {rotation_matrix(Axis::Y, psi), Vec3(geom.femur_length, 0.0, 0.0)};
}

Transform4 body_to_leg(const RobotGeometry& geom, int leg) {
    require_leg_index(leg);
    const LegMount& m = geom.legs[static_cast<std::size_t>(leg)];
    Mat3 flip = Vec3(1.0, -1.0, -1.0).asDiagonal();
    return {flip, Vec3(m.x, m.y, 0.0)};
}

}  // namespace hexapod
