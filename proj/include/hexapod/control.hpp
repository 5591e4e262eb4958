#pragma once

// Torque-feedback touch detection for legs in the lowering part of their swing.

#include <array>
#include <string>
#include <vector>

#include "hexapod/dynamics.hpp"
#include "hexapod/geometry.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod {

enum class TouchOutcome { Touched, KeepLowering, ExtendDown, Unreachable };

std::string to_string(TouchOutcome outcome);

struct TouchDecision {
    int leg = 0;
    TouchOutcome outcome = TouchOutcome::KeepLowering;
    LegEndpoint measured;  ///< body frame, set when touched
};

struct CorrespondenceConfig {
    double relative = 0.15;
    double absolute_floor = 5.0;       ///< N mm
    double lowering_increment = 10.0;  ///< mm per extend-down step
    double max_extend = 100.0;         ///< mm below the planned landing height

    void validate() const;
};

/// What the servos report each tick.
struct SensorReading {
    TorqueVector torques = TorqueVector::Zero();  ///< N mm
    Vec18 angles = Vec18::Zero();                 ///< rad
    std::array<bool, kLegCount> moving{};
};

/// Synchronous per-tick servo interface: the simulated plant here, a servo driver on hardware.
class TorqueSource {
public:
    virtual ~TorqueSource() = default;
    virtual SensorReading read(long tick) = 0;
    /// Holds the leg's servos at their current angles.
    virtual void stop_leg(int leg) = 0;
};

/// Actuator torques expected if `leg` were grounded in addition to `flags`.
TorqueVector expected_touch_torque(const TorqueComponents& model, const Vec24& q, const RobotGeometry& geom,
                                   ContactFlags flags, int leg);
TorqueVector expected_touch_torque(const RobotState& state, const RobotGeometry& geom, const ContactFlags& flags,
                                   int leg);

/// True iff each of the leg's three actuators satisfies
/// |sensed - expected| <= max(relative * |expected|, absolute_floor).
bool correspondence(const TorqueVector& expected, const TorqueVector& sensed, const CorrespondenceConfig& cfg,
                    int leg);

/// Body-frame endpoint from measured joint angles.
LegEndpoint resync_endpoint(int leg, const JointAngles& measured, const RobotGeometry& geom);

/// Per-leg lowering bookkeeping for the touch controller.
struct LegTouchState {
    bool lowering = false;
    bool touched = false;
    int extend_count = 0;
    double extension = 0.0;  ///< mm lowered beyond the planned landing height
};

class TouchController {
public:
    explicit TouchController(CorrespondenceConfig cfg = {});

    /// Arms a leg at the start of its lowering window.
    void begin_lowering(int leg);
    /// Clears the leg's state when its push phase starts.
    void release(int leg);

    /// One control step over every armed, untouched leg.
    ///   model: torque components of the believed state q (measured angles, believed body pose)
    ///   grounded: legs the controller knows to be in contact
    ///   target_done: the leg finished its planned swing motion
    /// Touched legs are stopped through `source` and their endpoint re-synchronised.
    /// Extend-down lowers the endpoint by the configured increment (body-frame z), once the leg
    /// has reached its target and its torques show it carrying no load.
    std::vector<TouchDecision> lowering_step(const TorqueComponents& model, const Vec24& q, ContactFlags grounded,
                                             const std::array<bool, kLegCount>& target_done,
                                             const SensorReading& reading, TorqueSource& source,
                                             const RobotGeometry& geom, std::array<Vec3, kLegCount>& endpoints);

    const LegTouchState& leg(int leg) const;
    const CorrespondenceConfig& config() const { return cfg_; }

private:
    bool matches(const TorqueComponents& model, const Vec24& q, const ContactFlags& grounded, int leg,
                 const std::vector<int>& others, const TorqueVector& sensed, const RobotGeometry& geom) const;

    /// Sensed torques agree with the leg hanging free; a reading that fits neither hypothesis
    /// is noise or a transient and is re-checked on the next tick.
    bool unloaded(const TorqueComponents& model, const Vec24& q, const ContactFlags& grounded, int leg,
                  const TorqueVector& sensed, const RobotGeometry& geom) const;

    CorrespondenceConfig cfg_;
    std::array<LegTouchState, kLegCount> legs_{};
};

}  // namespace hexapod
