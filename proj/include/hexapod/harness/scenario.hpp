#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hexapod/control.hpp"
#include "hexapod/gait.hpp"
#include "hexapod/geometry.hpp"
#include "hexapod/harness/config.hpp"
#include "hexapod/harness/plant.hpp"
#include "hexapod/terrain.hpp"
#include "hexapod/terrain_compensation.hpp"

namespace hexapod::harness {

enum class ControlMode { OpenLoop, ClosedLoop };

ControlMode parse_control_mode(const std::string& name);
std::string to_string(ControlMode mode);

/// Command in force from time `t` until the next entry.
struct CommandPoint {
    double t = 0.0;
    GaitCommand command;
};

struct Scenario {
    std::string name;
    std::filesystem::path source;
    RobotGeometry geometry = RobotGeometry::phantomx_defaults();
    TerrainModel believed;
    TerrainModel true_terrain;
    GaitParams gait = select_gait("tripod");
    std::vector<CommandPoint> commands;
    ControlMode mode = ControlMode::ClosedLoop;
    CompensationMode compensation = CompensationMode::Full;
    CompensationParams compensation_params;
    CorrespondenceConfig control;
    PlantParams plant;
    double duration = 10.0;   ///< s
    double tick_rate = 30.0;  ///< Hz
    double payload = 0.0;     ///< kg, already included in geometry.body.mass
    std::uint64_t seed = 1;
    std::optional<double> goal_x;            ///< mm, true body x that completes the task
    std::optional<double> max_attitude_deg;  ///< task fails when the true roll or pitch exceeds this
    double event_threshold = 5.0;            ///< mm, foot clearance mismatch counted as hang or overstep

    double dt() const { return 1.0 / tick_rate; }
    long tick_count() const;
    GaitCommand command_at(double t) const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Builds a scenario from a parsed document. Relative grid paths resolve against `base_dir`.
/// Unknown keys are rejected.
Scenario scenario_from_document(const ConfigDocument& doc, const std::filesystem::path& base_dir);

Scenario load_scenario(const std::filesystem::path& path);

/// Overrides a scalar setting, e.g. "scenario.noise_sigma" or "robot.l_f", and re-validates.
/// Throws ConfigError for keys that are not scalar settings.
Scenario with_parameter(const std::filesystem::path& path, const std::string& key, double value);

}  // namespace hexapod::harness
