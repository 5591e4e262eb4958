#pragma once

// Simulated robot: lagged servos, rigid body resting on its feet over the true terrain,
// torques from the dynamics model with the true contact flags.
//
// Legs lag behind their commands, except loaded legs whose command keeps the foot on the
// ground: those follow directly, so stance feet never slide against each other.

#include <array>
#include <random>
#include <vector>

#include "hexapod/control.hpp"
#include "hexapod/dynamics.hpp"
#include "hexapod/geometry.hpp"
#include "hexapod/terrain.hpp"

namespace hexapod::harness {

struct PlantParams {
    double servo_tau = 0.04;          ///< s, first-order servo lag
    double servo_deadband = 1.0;      ///< mm, a foot this close to its command settles on it
    double dt = 0.033;                ///< s
    double noise_sigma = 2.0;         ///< N mm, sensed torque noise
    double contact_threshold = 0.5;   ///< mm, foot clearance that makes contact
    double release_threshold = 3.0;   ///< mm, clearance that breaks an existing contact
    double stop_tolerance = 0.1;      ///< mm, commanded vs actual foot distance below which a leg is still
    double drift_rate = 0.0;          ///< mm of body position error per tick of body motion
    Vec3 drift_direction = Vec3(-1.0, 0.0, 0.0);
    double max_tilt = 0.4663;         ///< tan of the steepest resting tilt (25 deg)
    bool dynamic_torques = false;     ///< include inertial terms from finite-differenced rates

    double lag_gain() const { return dt / (dt + servo_tau); }
    void validate() const;
};

struct PlantState {
    long tick = 0;
    Vec18 commanded = Vec18::Zero();
    Vec18 actual = Vec18::Zero();
    Vec18 requested = Vec18::Zero();  ///< last command received, before any hold
    std::array<bool, kLegCount> stopped{};
    /// Stopped by meeting the ground while lowering; kept while the commands keep descending.
    std::array<bool, kLegCount> contact_hold{};
    ContactFlags grounded{};
    Transform4 planned;  ///< controller's body pose
    /// True body pose in the controller's frame, i.e. without the position error.
    Transform4 body;
    /// Accumulated position error: the robot really is at drift + where it believes.
    Vec3 drift = Vec3::Zero();
    /// Position error each foot sees the terrain with. A foot takes the current error while
    /// in the air and keeps it once it lands, so planted feet never slide.
    std::array<Vec3, kLegCount> foot_shift{};
    Vec24 q_prev = Vec24::Zero();
    Vec24 qd_prev = Vec24::Zero();
    TorqueVector torques = TorqueVector::Zero();  ///< noiseless
    TorqueVector sensed = TorqueVector::Zero();
    std::array<bool, kLegCount> moving{};
    /// Legs whose foot reached the ground this tick.
    std::vector<int> new_contacts;

    /// True body pose in the world.
    Transform4 world_body() const { return translation(drift) * body; }
};

/// Rests a body on the given feet over the terrain. `pose` is the unsupported body pose and
/// `feet` are body-frame foot positions; the body is moved vertically and tilted (no yaw) to
/// the lowest pose where every foot is on or above the ground. Foot i looks the terrain up at
/// its position plus shifts[i] (no shift when `shifts` is empty).
Transform4 settle_body(const Transform4& pose, const std::vector<Vec3>& feet, const TerrainModel& terrain,
                       double max_tilt = 0.4663, const std::vector<Vec3>& shifts = {});

/// Foot height above the terrain for a body-frame point under `pose`, with the terrain
/// looked up at the foot position plus `shift`.
double foot_clearance(const Transform4& pose, const Vec3& foot_body, const TerrainModel& terrain,
                      const Vec3& shift = Vec3::Zero());

/// Generalized body pose (x, y, z, rot_x, rot_y, rot_z) of a transform.
Vec6 pose_vector(const Transform4& t);

struct PlantTickResult {
    PlantState state;
    TorqueVector sensed;
    Vec18 measured;
};

/// One plant step towards `commanded` while the controller believes the body is at `planned`.
PlantTickResult plant_tick(const PlantState& state, const Vec18& commanded, const Transform4& planned,
                           const TerrainModel& true_terrain, const RobotGeometry& geom, const PlantParams& params,
                           std::mt19937_64& rng, TorqueEstimator& estimator);

class Plant : public TorqueSource {
public:
    Plant(RobotGeometry geom, TerrainModel true_terrain, PlantParams params, std::uint64_t seed);

    /// Places the robot at rest with actual = commanded angles.
    void reset(const Vec18& angles, const Transform4& planned);
    void step(const Vec18& commanded, const Transform4& planned);

    SensorReading read(long tick) override;
    void stop_leg(int leg) override;

    const PlantState& state() const { return state_; }
    const PlantParams& params() const { return params_; }
    const TerrainModel& terrain() const { return terrain_; }
    int torque_fallbacks() const { return estimator_.fallback_count(); }

private:
    RobotGeometry geom_;
    TerrainModel terrain_;
    PlantParams params_;
    std::mt19937_64 rng_;
    TorqueEstimator estimator_;
    PlantState state_;
};

}  // namespace hexapod::harness
