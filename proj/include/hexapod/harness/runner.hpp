#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "hexapod/harness/scenario.hpp"

namespace hexapod::harness {

/// One record per tick; the CSV columns follow the field order.
struct TickRecord {
    long tick = 0;
    double time = 0.0;
    bool held = false;  ///< gait paused waiting for a lowering leg
    Vec6 planned_pose = Vec6::Zero();  ///< controller's body pose estimate
    Vec6 true_pose = Vec6::Zero();
    Vec18 commanded = Vec18::Zero();
    Vec18 actual = Vec18::Zero();
    TorqueVector model_torque = TorqueVector::Zero();  ///< expected with the controller's contact flags
    TorqueVector plant_torque = TorqueVector::Zero();  ///< sensed
    ContactFlags true_contact{};
    ContactFlags believed_contact{};
    std::array<LegRole, kLegCount> role{};
    std::array<bool, kLegCount> lowering{};
    double comp_dz = 0.0;
    double comp_alpha = 0.0;
    double comp_beta = 0.0;
    int comp_iterations = 0;
    bool comp_converged = true;
    std::vector<std::string> events;  ///< "RF:touched", "LM:extend_down", "RR:hang", ...
};

struct LegCounts {
    int touches = 0;
    int extends = 0;
    int hangs = 0;
    int oversteps = 0;
    /// Extend-down steps before each touch, in order.
    std::vector<int> extends_per_touch;
};

struct CompensationStats {
    int solves = 0;
    int converged = 0;
    int fallbacks = 0;
    int iterations_min = 0;
    int iterations_median = 0;
    int iterations_max = 0;
    std::map<int, int> histogram;  ///< iterations -> count
};

struct RunSummary {
    std::string scenario;
    std::string mode;
    std::uint64_t seed = 0;
    long ticks = 0;
    bool completed = false;
    bool aborted = false;
    std::string abort_reason;
    double max_roll_deg = 0.0;   ///< true body attitude
    double max_pitch_deg = 0.0;
    double max_attitude_deviation_deg = 0.0;  ///< true vs planned roll/pitch
    std::array<LegCounts, kLegCount> legs{};
    CompensationStats compensation;
    double final_x = 0.0;  ///< true body x
    std::optional<double> goal_x;
    int hold_ticks = 0;
    int torque_fallbacks = 0;

    int total_hangs() const;
    int total_oversteps() const;
    int total_extends() const;
};

struct RunResult {
    std::vector<TickRecord> log;
    RunSummary summary;
};

/// Runs the scenario to its duration, or until the controller aborts.
RunResult run_scenario(const Scenario& scenario);

/// Femur stop-plateaus: stretches of at least `min_ticks` consecutive ticks in which the
/// femur of a swinging `leg` holds still (per-tick change at most `still` rad). Returns the
/// tick of each plateau start, at most one per swing.
std::vector<long> femur_plateaus(const std::vector<TickRecord>& log, int leg, double still = 1e-6, int min_ticks = 2);

}  // namespace hexapod::harness
