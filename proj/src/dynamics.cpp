#include "hexapod/dynamics.hpp"

#include <algorithm>

#include "hexapod/errors.hpp"

namespace hexapod {

namespace {

constexpr double kMassStep = 1e-6;
constexpr double kTimeStep = 1e-6;

using Jac9 = Eigen::Matrix<double, 6, 9>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

struct LinkPose {
    Mat3 r;
    Vec3 o;
};

struct LegKinematics {
    std::array<LinkPose, 3> links;  // coxa, femur, tibia
    std::array<Vec3, 3> axes;
    Vec3 foot;
};

struct BodyKinematics {
    Mat3 r;
    Vec3 o;
    Mat3 euler;  // body Euler rates -> world angular velocity
};

BodyKinematics body_kinematics(const Vec24& q) {
    const Vec6 pose = q.tail<6>();
    return {rotation_zyx(pose[3], pose[4], pose[5]), pose.head<3>(), euler_rate_angular(pose[3], pose[4], pose[5])};
}

LegKinematics leg_kinematics(const Vec24& q, const BodyKinematics& b, const RobotGeometry& geom, int leg) {
    const Transform4 body(b.r, b.o);
    const int i = 3 * leg;
    const Transform4 coxa = body * body_coxa(geom, leg, q[i]);
    const Transform4 femur = coxa * coxa_femur(geom, q[i + 1]);
    const Transform4 tibia = femur * femur_tibia(geom, q[i + 2]);
    LegKinematics k;
    k.links = {LinkPose{coxa.rotation(), coxa.translation()}, LinkPose{femur.rotation(), femur.translation()},
               LinkPose{tibia.rotation(), tibia.translation()}};
    k.axes = {coxa.rotation().col(2), coxa.rotation().col(1), femur.rotation().col(1)};
    k.foot = tibia.apply(Vec3(geom.tibia_length, 0.0, 0.0));
    return k;
}

// World-frame linear velocity Jacobian of point p on link `depth` of a leg.
// Columns: the leg's three joints, then the six body DOF.
Eigen::Matrix<double, 3, 9> point_jacobian(const Vec3& p, int depth, const LegKinematics& k, const BodyKinematics& b) {
    Eigen::Matrix<double, 3, 9> j = Eigen::Matrix<double, 3, 9>::Zero();
    for (int d = 0; d <= depth; ++d) {
        j.col(d) = k.axes[static_cast<std::size_t>(d)].cross(p - k.links[static_cast<std::size_t>(d)].o);
    }
    j.block<3, 3>(0, 3) = Mat3::Identity();
    for (int c = 0; c < 3; ++c) {
        j.col(6 + c) = b.euler.col(c).cross(p - b.o);
    }
    return j;
}

// Link twist (origin velocity and angular velocity, both in link coordinates).
Jac9 link_jacobian(int depth, const LegKinematics& k, const BodyKinematics& b) {
    const LinkPose& link = k.links[static_cast<std::size_t>(depth)];
    Eigen::Matrix<double, 3, 9> w = Eigen::Matrix<double, 3, 9>::Zero();
    for (int d = 0; d <= depth; ++d) {
        w.col(d) = k.axes[static_cast<std::size_t>(d)];
    }
    w.block<3, 3>(0, 6) = b.euler;
    Jac9 j;
    j.topRows<3>() = link.r.transpose() * point_jacobian(link.o, depth, k, b);
    j.bottomRows<3>() = link.r.transpose() * w;
    return j;
}

const LinkInertial& link_inertial(const RobotGeometry& geom, int depth) {
    switch (depth) {
        case 0:
            return geom.coxa;
        case 1:
            return geom.femur;
        default:
            return geom.tibia;
    }
}

std::array<int, 9> leg_columns(int leg) {
    return {3 * leg, 3 * leg + 1, 3 * leg + 2, 18, 19, 20, 21, 22, 23};
}

Vec24 scaled_gradient(const Vec24& q, double (*f)(const Vec24&, const RobotGeometry&), const RobotGeometry& geom) {
    Vec24 g;
    for (int i = 0; i < kStateSize; ++i) {
        Vec24 qp = q;
        Vec24 qm = q;
        qp[i] += kMassStep;
        qm[i] -= kMassStep;
        g[i] = (f(qp, geom) - f(qm, geom)) / (2 * kMassStep);
    }
    return g;
}

}  // namespace

JointAngles ActuatorState::leg(int leg) const {
    require_leg_index(leg);
    return {angles[3 * leg], angles[3 * leg + 1], angles[3 * leg + 2]};
}

void ActuatorState::set_leg(int leg, const JointAngles& a) {
    require_leg_index(leg);
    angles[3 * leg] = a.theta;
    angles[3 * leg + 1] = a.phi;
    angles[3 * leg + 2] = a.psi;
}

Vec24 RobotState::q() const {
    Vec24 v;
    v << actuators.angles, body.pose;
    return v;
}

Vec24 RobotState::qd() const {
    Vec24 v;
    v << actuators.rate, body.rate;
    return v;
}

Vec24 RobotState::qdd() const {
    Vec24 v;
    v << actuators.accel, body.accel;
    return v;
}

RobotState RobotState::from_vectors(const Vec24& q, const Vec24& qd, const Vec24& qdd) {
    RobotState s;
    s.actuators.angles = q.head<kActuatorCount>();
    s.actuators.rate = qd.head<kActuatorCount>();
    s.actuators.accel = qdd.head<kActuatorCount>();
    s.body.pose = q.tail<6>();
    s.body.rate = qd.tail<6>();
    s.body.accel = qdd.tail<6>();
    return s;
}

Transform4 body_transform(const Vec6& pose) {
    return {rotation_zyx(pose[3], pose[4], pose[5]), pose.head<3>()};
}

JointAxes joint_axes(const Vec24& q, const RobotGeometry& geom, int leg) {
    require_leg_index(leg);
    const BodyKinematics b = body_kinematics(q);
    const LegKinematics k = leg_kinematics(q, b, geom, leg);
    return {k.axes[0], k.axes[1], k.axes[2], k.links[0].o, k.links[1].o, k.links[2].o, k.foot};
}

LegConstraint leg_constraints(const Vec24& q, const RobotGeometry& geom, int leg) {
    require_leg_index(leg);
    const BodyKinematics b = body_kinematics(q);
    const LegKinematics k = leg_kinematics(q, b, geom, leg);
    LegConstraint c;
    for (int d = 0; d < 3; ++d) {
        const auto i = static_cast<std::size_t>(d);
        c.actuated.col(d) = k.axes[i].cross(k.foot - k.links[i].o);
    }
    Eigen::Matrix<double, 3, 6> lever;
    lever << Mat3::Identity(), -skew(k.foot - b.o);
    const Vec6 pose = q.tail<6>();
    c.body = lever * euler_rate_map(pose[3], pose[4], pose[5]);
    return c;
}

ConstraintMatrices assemble_constraints(const std::array<LegConstraint, kLegCount>& legs, const ContactFlags& flags) {
    ConstraintMatrices m;
    for (int l = 0; l < kLegCount; ++l) {
        if (!flags[static_cast<std::size_t>(l)]) {
            continue;
        }
        m.a.block<3, 6>(3 * l, 0) = legs[static_cast<std::size_t>(l)].body;
        m.b.block<3, 3>(3 * l, 3 * l) = legs[static_cast<std::size_t>(l)].actuated;
    }
    return m;
}

ConstraintMatrices assemble_constraints(const Vec24& q, const RobotGeometry& geom, const ContactFlags& flags) {
    std::array<LegConstraint, kLegCount> legs;
    for (int l = 0; l < kLegCount; ++l) {
        if (flags[static_cast<std::size_t>(l)]) {
            legs[static_cast<std::size_t>(l)] = leg_constraints(q, geom, l);
        }
    }
    return assemble_constraints(legs, flags);
}

Mat24 mass_matrix(const Vec24& q, const RobotGeometry& geom) {
    Mat24 m = Mat24::Zero();
    const BodyKinematics b = body_kinematics(q);

    Mat6 jb = Mat6::Zero();
    jb.topLeftCorner<3, 3>() = b.r.transpose();
    jb.bottomRightCorner<3, 3>() = b.r.transpose() * b.euler;
    m.bottomRightCorner<6, 6>() += jb.transpose() * geom.body.spatial_inertia() * jb;

    std::array<Mat6, 3> link_inertia;
    for (int d = 0; d < 3; ++d) {
        link_inertia[static_cast<std::size_t>(d)] = link_inertial(geom, d).spatial_inertia();
    }
    for (int leg = 0; leg < kLegCount; ++leg) {
        const LegKinematics k = leg_kinematics(q, b, geom, leg);
        Mat9 small = Mat9::Zero();
        for (int d = 0; d < 3; ++d) {
            const Jac9 j = link_jacobian(d, k, b);
            small += j.transpose() * link_inertia[static_cast<std::size_t>(d)] * j;
        }
        const auto cols = leg_columns(leg);
        for (int r = 0; r < 9; ++r) {
            for (int c = 0; c < 9; ++c) {
                m(cols[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]) += small(r, c);
            }
        }
    }
    return m;
}

double kinetic_energy(const Vec24& q, const Vec24& qd, const RobotGeometry& geom) {
    return 0.5 * kEnergyToNmm * qd.dot(mass_matrix(q, geom) * qd);
}

double potential_energy(const Vec24& q, const RobotGeometry& geom) {
    const BodyKinematics b = body_kinematics(q);
    Vec3 weighted = geom.body.mass * (b.o + b.r * geom.body.com);
    for (int leg = 0; leg < kLegCount; ++leg) {
        const LegKinematics k = leg_kinematics(q, b, geom, leg);
        for (int d = 0; d < 3; ++d) {
            const LinkInertial& in = link_inertial(geom, d);
            const LinkPose& lp = k.links[static_cast<std::size_t>(d)];
            weighted += in.mass * (lp.o + lp.r * in.com);
        }
    }
    return -kEnergyToNmm * geom.gravity.dot(weighted);
}

Vec24 gravity_torque(const Vec24& q, const RobotGeometry& geom) {
    Vec24 g = Vec24::Zero();
    const BodyKinematics b = body_kinematics(q);
    const Vec3 body_com = b.o + b.r * geom.body.com;
    Vec6 body_part;
    body_part.head<3>() = geom.body.mass * geom.gravity;
    for (int c = 0; c < 3; ++c) {
        body_part[3 + c] = geom.body.mass * geom.gravity.dot(b.euler.col(c).cross(body_com - b.o));
    }
    g.tail<6>() -= kEnergyToNmm * body_part;

    for (int leg = 0; leg < kLegCount; ++leg) {
        const LegKinematics k = leg_kinematics(q, b, geom, leg);
        Eigen::Matrix<double, 9, 1> part = Eigen::Matrix<double, 9, 1>::Zero();
        for (int d = 0; d < 3; ++d) {
            const LinkInertial& in = link_inertial(geom, d);
            const LinkPose& lp = k.links[static_cast<std::size_t>(d)];
            const Vec3 com = lp.o + lp.r * in.com;
            part += in.mass * point_jacobian(com, d, k, b).transpose() * geom.gravity;
        }
        const auto cols = leg_columns(leg);
        for (int r = 0; r < 9; ++r) {
            g[cols[static_cast<std::size_t>(r)]] -= kEnergyToNmm * part[r];
        }
    }
    return g;
}

Vec24 velocity_product(const Vec24& q, const Vec24& qd, const RobotGeometry& geom) {
    Vec24 c = Vec24::Zero();
    if (qd.isZero(0.0)) {
        return c;
    }
    // (C qd)_i = sum_k (dM/dq_k qd)_i qd_k - 1/2 qd^T dM/dq_i qd
    for (int k = 0; k < kStateSize; ++k) {
        Vec24 qp = q;
        Vec24 qm = q;
        qp[k] += kMassStep;
        qm[k] -= kMassStep;
        const Mat24 dm = (mass_matrix(qp, geom) - mass_matrix(qm, geom)) / (2 * kMassStep);
        const Vec24 dm_qd = dm * qd;
        c += qd[k] * dm_qd;
        c[k] -= 0.5 * qd.dot(dm_qd);
    }
    return c;
}

TorqueComponents torque_components(const RobotState& state, const RobotGeometry& geom) {
    const Vec24 q = state.q();
    const Vec24 qd = state.qd();
    const Vec24 qdd = state.qdd();
    Vec24 tau = gravity_torque(q, geom);
    if (!qdd.isZero(0.0) || !qd.isZero(0.0)) {
        tau += kEnergyToNmm * (mass_matrix(q, geom) * qdd + velocity_product(q, qd, geom));
    }
    return {tau.head<kActuatorCount>(), tau.tail<6>()};
}

TorqueComponents fd_lagrangian_oracle(const RobotState& state, const RobotGeometry& geom) {
    const Vec24 q = state.q();
    const Vec24 qd = state.qd();
    const Vec24 qdd = state.qdd();

    // Generalized momentum dT/dqdot. T is quadratic in the rates, so a unit central step is exact.
    auto momentum = [&](const Vec24& qq, const Vec24& vv) {
        Vec24 p;
        for (int i = 0; i < kStateSize; ++i) {
            Vec24 vp = vv;
            Vec24 vm = vv;
            vp[i] += 1.0;
            vm[i] -= 1.0;
            p[i] = (kinetic_energy(qq, vp, geom) - kinetic_energy(qq, vm, geom)) / 2.0;
        }
        return p;
    };
    const double h = kTimeStep;
    const Vec24 q_next = q + h * qd + 0.5 * h * h * qdd;
    const Vec24 q_prev = q - h * qd + 0.5 * h * h * qdd;
    const Vec24 dp_dt = (momentum(q_next, qd + h * qdd) - momentum(q_prev, qd - h * qdd)) / (2 * h);

    Vec24 dt_dq;
    for (int i = 0; i < kStateSize; ++i) {
        Vec24 qp = q;
        Vec24 qm = q;
        qp[i] += kMassStep;
        qm[i] -= kMassStep;
        dt_dq[i] = (kinetic_energy(qp, qd, geom) - kinetic_energy(qm, qd, geom)) / (2 * kMassStep);
    }
    const Vec24 du_dq = scaled_gradient(q, &potential_energy, geom);
    const Vec24 tau = dp_dt - dt_dq + du_dq;
    return {tau.head<kActuatorCount>(), tau.tail<6>()};
}

Eigen::Matrix<double, 6, kActuatorCount> torque_projection(const ConstraintMatrices& c) {
    const MatX pinv = left_pseudoinverse(c.a);
    return -pinv * c.b;
}

TorqueVector actuator_torque(const Vec18& tau_a, const Vec6& tau_b, const ConstraintMatrices& c) {
    return tau_a + torque_projection(c).transpose() * tau_b;
}

TorqueVector actuator_torque(const TorqueComponents& t, const ConstraintMatrices& c) {
    return actuator_torque(t.actuated, t.body, c);
}

std::array<Vec3, kLegCount> contact_forces(const TorqueVector& tau, const Vec18& tau_a, const Vec24& q,
                                           const RobotGeometry& geom, const ContactFlags& flags) {
    std::array<Vec3, kLegCount> f{};
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        f[i].setZero();
        if (!flags[i]) {
            continue;
        }
        const Mat3 b = leg_constraints(q, geom, l).actuated;
        const Vec3 dtau = tau.segment<3>(3 * l) - tau_a.segment<3>(3 * l);
        f[i] = -b.transpose().fullPivLu().solve(dtau);
    }
    return f;
}

TorqueVector TorqueEstimator::estimate(const TorqueComponents& t, const ConstraintMatrices& c) {
    fell_back_ = false;
    try {
        projection_ = torque_projection(c);
    } catch (const RankDeficiencyError&) {
        fell_back_ = true;
        ++fallback_count_;
        if (!projection_) {
            return t.actuated;
        }
    }
    return t.actuated + projection_->transpose() * t.body;
}

int grounded_count(const ContactFlags& flags) {
    return static_cast<int>(std::count(flags.begin(), flags.end(), true));
}

}  // namespace hexapod
