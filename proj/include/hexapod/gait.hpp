#pragma once

#include <array>
#include <string>

#include "hexapod/geometry.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod {

/// User command: forward and lateral speed (mm/s), yaw rate (rad/s).
struct GaitCommand {
    double vx = 0.0;
    double vy = 0.0;
    double wz = 0.0;

    bool is_zero() const { return vx == 0.0 && vy == 0.0 && wz == 0.0; }
};

enum class LegRole { Push, Swing };

struct GaitParams {
    std::string name = "tripod";
    int phase_count = 2;
    int swing_phases = 1;                    ///< consecutive phases each leg spends swinging
    std::array<int, kLegCount> start_phase{};  ///< phase in which each leg starts its swing
    int steps_per_phase = 8;
    int lowering_ticks = 3;
    double lift_height = 30.0;  ///< mm
    double dt = 0.033;          ///< s
    double max_vx = 100.0;
    double max_vy = 100.0;
    double max_wz = 0.5;
    double max_stride = 90.0;  ///< mm of foot travel per push phase

    int swing_ticks() const { return swing_phases * steps_per_phase; }
    int push_ticks() const { return (phase_count - swing_phases) * steps_per_phase; }
    int cycle_ticks() const { return phase_count * steps_per_phase; }
    double cycle_time() const { return cycle_ticks() * dt; }

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// Phase tables for the tripod, ripple and wave gaits with default timing.
GaitParams select_gait(const std::string& name);

struct LegStep {
    LegRole role = LegRole::Push;
    GaitDelta push_delta;       ///< foot motion in the body frame, opposite to the body motion
    SwingDisplacement swing;    ///< absolute displacement from neutral
    double z_gait = 0.0;        ///< swing altitude above the terrain, mm
    int swing_tick = 0;         ///< 1..swing_ticks while swinging
    bool lowering = false;      ///< inside the final lowering window
    bool swing_complete = false;  ///< last swing tick: the leg reaches its target
};

struct StepPlan {
    std::array<LegStep, kLegCount> legs{};
    GaitDelta body_delta;  ///< gait-frame body motion this tick
    GaitCommand command;   ///< command after saturation
    bool saturated = false;
    double dt = 0.0;
    int phase = 0;
    long tick = 0;

    int push_count() const;
};

/// Per-robot gait state: the gait clock and the per-leg displacement from neutral.
struct GaitPhaseState {
    long tick = 0;
    std::array<SwingDisplacement, kLegCount> displacement{};
    std::array<SwingDisplacement, kLegCount> liftoff{};
    /// Swing tick at which the current swing began; 0 while the leg is not swinging.
    std::array<int, kLegCount> swing_entry{};

    /// Phase index of the next tick.
    int phase(const GaitParams& params) const;
    bool at_phase_boundary(const GaitParams& params) const;
};

/// Role of a leg at a gait tick.
LegRole leg_role(const GaitParams& params, int leg, long tick);

/// Ticks into the current swing (1-based); 0 when pushing.
int swing_tick_index(const GaitParams& params, int leg, long tick);

/// Swing altitude: linear rise to lift_height, then lowering to 0 over the last lowering_ticks.
double swing_altitude(const GaitParams& params, int swing_tick);

/// Clamps a command to the configured maxima.
GaitCommand saturate(const GaitCommand& cmd, const GaitParams& params, bool* saturated = nullptr);

/// Advances the gait by one tick. A zero command at a phase boundary holds the gait:
/// every leg pushes with zero deltas and the clock does not advance.
StepPlan gait_tick(const GaitCommand& cmd, GaitPhaseState& state, const GaitParams& params);

/// Distance from the body origin to the nearest edge of the support polygon of the pushing
/// feet at their neutral positions in the given phase. Negative when the origin lies outside.
double stability_margin(const GaitParams& params, const RobotGeometry& geom, int phase);

}  // namespace hexapod
