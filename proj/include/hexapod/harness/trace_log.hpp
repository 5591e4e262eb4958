#pragma once

// Run output: run.csv (one row per tick), angles.csv and torques.csv (per-actuator traces
// for plotting) and summary.json.
//
// run.csv columns, in order:
//   tick, time, held,
//   body_x, body_y, body_z, body_rx, body_ry, body_rz          controller's pose estimate
//   true_x, true_y, true_z, true_rx, true_ry, true_rz          simulated pose
//   cmd_<leg>_<joint> x18, act_<leg>_<joint> x18               rad
//   model_tau_<leg>_<joint> x18, plant_tau_<leg>_<joint> x18   N mm
//   contact_<leg> x6, believed_<leg> x6, swing_<leg> x6        0/1
//   comp_dz, comp_alpha, comp_beta, comp_iterations, comp_converged,
//   events                                                     "RF:touched|LM:extend_down", may be empty
// Legs are RF RM RR LF LM LR, joints coxa femur tibia. Reals use fixed 6-decimal notation.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "hexapod/harness/runner.hpp"

namespace hexapod::harness {

std::vector<std::string> run_csv_header();
std::string run_csv_row(const TickRecord& rec);

void write_run_csv(std::ostream& out, const std::vector<TickRecord>& log);
void write_angles_csv(std::ostream& out, const std::vector<TickRecord>& log);
void write_torques_csv(std::ostream& out, const std::vector<TickRecord>& log);
std::string summary_json(const RunSummary& summary);

/// Writes every output file into `dir`, creating it. Throws Error naming the path on I/O failure.
void write_log(const RunResult& result, const std::filesystem::path& dir);

}  // namespace hexapod::harness
