#include <cmath>
#include <vector>

#include "doctest.h"
#include "hexapod/control.hpp"
#include "hexapod/errors.hpp"
#include "oracles.hpp"

using namespace hexapod;

namespace {

const RobotGeometry kGeom = RobotGeometry::phantomx_defaults();
const ContactFlags kTripodA{true, false, true, false, true, false};

Vec24 stand_q() {
    Vec24 q = Vec24::Zero();
    for (int l = 0; l < kLegCount; ++l) {
        const JointAngles a = body_endpoint_ik(kGeom.legs[l].neutral, kGeom, l);
        q.segment<3>(3 * l) << a.theta, a.phi, a.psi;
    }
    q[kActuatorCount + 2] = kGeom.start_position.z();
    return q;
}

class RecordingSource : public TorqueSource {
public:
    SensorReading reading;
    std::vector<int> stopped;
    SensorReading read(long) override { return reading; }
    void stop_leg(int leg) override { stopped.push_back(leg); }
};

struct Fixture {
    Vec24 q = stand_q();
    TorqueComponents model = torque_components(RobotState::from_vectors(q), kGeom);
    std::array<Vec3, kLegCount> endpoints{};
    std::array<bool, kLegCount> done{};
    RecordingSource source;
    TouchController ctl;

    Fixture() {
        for (int l = 0; l < kLegCount; ++l) endpoints[l] = kGeom.legs[l].neutral;
        source.reading.angles = q.head<kActuatorCount>();
    }

    TorqueVector supported_by(ContactFlags flags) const {
        return actuator_torque(model, assemble_constraints(q, kGeom, flags));
    }

    std::vector<TouchDecision> step() {
        return ctl.lowering_step(model, q, kTripodA, done, source.reading, source, kGeom, endpoints);
    }
};

}  // namespace

TEST_CASE("expected touch torque") {
    const Vec24 q = stand_q();
    const TorqueComponents model = torque_components(RobotState::from_vectors(q), kGeom);
    const TorqueVector plain = actuator_torque(model, assemble_constraints(q, kGeom, kTripodA));
    CHECK((expected_touch_torque(model, q, kGeom, kTripodA, 0) - plain).isZero(0.0));
    CHECK((expected_touch_torque(RobotState::from_vectors(q), kGeom, kTripodA, 2) - plain).isZero(0.0));

    // Grounding a hanging leg moves its femur from carrying only itself to a share of the body.
    const TorqueVector grounded = expected_touch_torque(model, q, kGeom, kTripodA, 1);
    CHECK(std::abs(plain[4] - model.actuated[4]) < 1e-9);
    CHECK(std::abs(grounded[4]) > 2.0 * std::abs(plain[4]));
    const auto forces = contact_forces(grounded, model.actuated, q, kGeom, {true, true, true, false, true, false});
    double lift = 0.0;
    for (const Vec3& f : forces) lift += f.z();
    CHECK(lift == doctest::Approx(kGeom.total_mass() * 9.81).epsilon(0.01));
    CHECK(forces[1].z() > 0.1 * lift);

    RobotGeometry weightless = kGeom;
    weightless.gravity.setZero();
    CHECK(expected_touch_torque(RobotState::from_vectors(q), weightless, kTripodA, 3).isZero(0.0));
    CHECK_THROWS_AS(expected_touch_torque(model, q, kGeom, ContactFlags{}, 1), RankDeficiencyError);
}

TEST_CASE("correspondence band") {
    const CorrespondenceConfig cfg;
    TorqueVector expected = TorqueVector::Constant(100.0);
    CHECK(correspondence(expected, expected, cfg, 2));

    TorqueVector sensed = expected;
    sensed[7] = 114.0;
    CHECK(correspondence(expected, sensed, cfg, 2));
    sensed[7] = 116.0;
    CHECK_FALSE(correspondence(expected, sensed, cfg, 2));
    CHECK(correspondence(expected, sensed, cfg, 1));  // other legs are ignored

    expected.setZero();
    sensed.setZero();
    sensed[3] = 4.9;
    CHECK(correspondence(expected, sensed, cfg, 1));
    sensed[3] = -5.1;
    CHECK_FALSE(correspondence(expected, sensed, cfg, 1));
    sensed[3] = std::nan("");
    CHECK_FALSE(correspondence(expected, sensed, cfg, 1));

    // A hanging leg against its grounded expectation.
    const Vec24 q = stand_q();
    const TorqueComponents model = torque_components(RobotState::from_vectors(q), kGeom);
    const TorqueVector hanging = actuator_torque(model, assemble_constraints(q, kGeom, kTripodA));
    CHECK_FALSE(correspondence(expected_touch_torque(model, q, kGeom, kTripodA, 3), hanging, cfg, 3));

    CorrespondenceConfig bad;
    bad.relative = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.lowering_increment = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("endpoint resynchronisation") {
    for (int l = 0; l < kLegCount; ++l) {
        const Vec3 target = kGeom.legs[l].neutral + Vec3(5.0, -8.0, 12.0);
        const JointAngles a = body_endpoint_ik(target, kGeom, l);
        const LegEndpoint e = resync_endpoint(l, a, kGeom);
        CHECK(e.frame == Frame::Body);
        CHECK((e.position - target).norm() < 1e-9);

        JointAngles early = a;
        early.phi -= 0.1;
        const double rise = oracle::planar_leg_fk(a, kGeom, l).z() - oracle::planar_leg_fk(early, kGeom, l).z();
        CHECK(rise > 0.0);
        CHECK(resync_endpoint(l, early, kGeom).position.z() - target.z() == doctest::Approx(rise));
    }
    CHECK_THROWS_AS(resync_endpoint(6, JointAngles{}, kGeom), InvalidArgument);
}

TEST_CASE("touch stops the leg and resyncs its endpoint") {
    Fixture f;
    f.ctl.begin_lowering(1);
    f.source.reading.torques = f.supported_by({true, true, true, false, true, false});
    f.source.reading.angles[4] -= 0.05;  // servo stopped a little short of its command
    const auto d = f.step();
    REQUIRE(d.size() == 1);
    CHECK(d[0].leg == 1);
    CHECK(d[0].outcome == TouchOutcome::Touched);
    CHECK(f.source.stopped == std::vector<int>{1});
    const JointAngles measured{f.source.reading.angles[3], f.source.reading.angles[4], f.source.reading.angles[5]};
    CHECK((f.endpoints[1] - foot_in_body(measured, kGeom, 1)).norm() < 1e-12);
    CHECK((d[0].measured.position - f.endpoints[1]).norm() == 0.0);
    CHECK(f.ctl.leg(1).touched);
    CHECK_FALSE(f.ctl.leg(1).lowering);

    // Later fluctuations do not reopen the leg.
    f.source.reading.torques = f.supported_by(kTripodA);
    f.done[1] = true;
    CHECK(f.step().empty());
    f.ctl.begin_lowering(1);
    CHECK(f.step().empty());
    f.ctl.release(1);
    CHECK_FALSE(f.ctl.leg(1).touched);
}

TEST_CASE("hanging leg keeps lowering, then extends down") {
    Fixture f;
    f.ctl.begin_lowering(3);
    f.source.reading.torques = f.supported_by(kTripodA);
    auto d = f.step();
    REQUIRE(d.size() == 1);
    CHECK(d[0].outcome == TouchOutcome::KeepLowering);
    CHECK(f.source.stopped.empty());

    f.done[3] = true;
    f.source.reading.moving[3] = true;
    CHECK(f.step()[0].outcome == TouchOutcome::KeepLowering);
    f.source.reading.moving[3] = false;
    const Vec3 before = f.endpoints[3];
    d = f.step();
    CHECK(d[0].outcome == TouchOutcome::ExtendDown);
    CHECK((f.endpoints[3] - (before - Vec3(0, 0, 10))).norm() < 1e-12);
    CHECK(f.ctl.leg(3).extend_count == 1);
    CHECK(f.ctl.leg(3).extension == 10.0);
}

TEST_CASE("a pit 30 mm deep takes three extensions") {
    Fixture f;
    f.ctl.begin_lowering(3);
    f.done[3] = true;
    f.source.reading.torques = f.supported_by(kTripodA);
    const double floor = f.endpoints[3].z() - 30.0;
    std::vector<TouchOutcome> outcomes;
    for (int tick = 0; tick < 10 && !f.ctl.leg(3).touched; ++tick) {
        if (f.endpoints[3].z() <= floor + 1e-9) {
            f.source.reading.torques = f.supported_by({true, false, true, true, true, false});
        }
        outcomes.push_back(f.step()[0].outcome);
    }
    CHECK(outcomes == std::vector<TouchOutcome>{TouchOutcome::ExtendDown, TouchOutcome::ExtendDown,
                                                TouchOutcome::ExtendDown, TouchOutcome::Touched});
    CHECK(f.ctl.leg(3).extend_count == 3);
}

TEST_CASE("extension is capped") {
    CorrespondenceConfig cfg;
    cfg.max_extend = 30.0;
    Fixture f;
    f.ctl = TouchController(cfg);
    f.ctl.begin_lowering(5);
    f.done[5] = true;
    f.source.reading.torques = f.supported_by(kTripodA);
    for (int i = 0; i < 3; ++i) CHECK(f.step()[0].outcome == TouchOutcome::ExtendDown);
    const Vec3 deepest = f.endpoints[5];
    CHECK(f.step()[0].outcome == TouchOutcome::Unreachable);
    CHECK(f.endpoints[5] == deepest);

    // Beyond the leg's reach the diagnostic fires before any command is issued.
    Fixture g;
    g.ctl.begin_lowering(5);
    g.done[5] = true;
    g.source.reading.torques = g.supported_by(kTripodA);
    g.endpoints[5].z() = -175.0;
    CHECK(g.step()[0].outcome == TouchOutcome::Unreachable);
    CHECK(g.endpoints[5].z() == -175.0);
}

TEST_CASE("simultaneous touches are recognised") {
    Fixture f;
    f.ctl.begin_lowering(1);
    f.ctl.begin_lowering(3);
    f.source.reading.torques = f.supported_by({true, true, true, true, true, false});
    const auto d = f.step();
    REQUIRE(d.size() == 2);
    CHECK(d[0].outcome == TouchOutcome::Touched);
    CHECK(d[1].outcome == TouchOutcome::Touched);
    CHECK(f.source.stopped == std::vector<int>{1, 3});
}
