#include "hexapod/harness/trace_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hexapod/errors.hpp"

namespace hexapod::harness {

namespace {

const char* const kJoints[] = {"coxa", "femur", "tibia"};

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    // Avoid "-0.000000" so identical states print identically.
    if (std::string(buf) == "-0.000000") return "0.000000";
    return buf;
}

void actuator_columns(std::vector<std::string>& h, const std::string& prefix) {
    for (int l = 0; l < kLegCount; ++l) {
        for (const char* j : kJoints) h.push_back(prefix + "_" + leg_code(l) + "_" + j);
    }
}

void leg_columns(std::vector<std::string>& h, const std::string& prefix) {
    for (int l = 0; l < kLegCount; ++l) h.push_back(prefix + "_" + leg_code(l));
}

template <typename Vec>
void append(std::string& row, const Vec& v) {
    for (int i = 0; i < v.size(); ++i) {
        row += ',';
        row += fixed(v[i]);
    }
}

void append_flags(std::string& row, const std::array<bool, kLegCount>& flags) {
    for (bool f : flags) row += f ? ",1" : ",0";
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::vector<std::string> run_csv_header() {
    std::vector<std::string> h = {"tick", "time", "held"};
    for (const char* c : {"body_x", "body_y", "body_z", "body_rx", "body_ry", "body_rz"}) h.emplace_back(c);
    for (const char* c : {"true_x", "true_y", "true_z", "true_rx", "true_ry", "true_rz"}) h.emplace_back(c);
    actuator_columns(h, "cmd");
    actuator_columns(h, "act");
    actuator_columns(h, "model_tau");
    actuator_columns(h, "plant_tau");
    leg_columns(h, "contact");
    leg_columns(h, "believed");
    leg_columns(h, "swing");
    for (const char* c : {"comp_dz", "comp_alpha", "comp_beta", "comp_iterations", "comp_converged", "events"}) {
        h.emplace_back(c);
    }
    return h;
}

std::string run_csv_row(const TickRecord& rec) {
    std::string row = std::to_string(rec.tick) + "," + fixed(rec.time) + (rec.held ? ",1" : ",0");
    append(row, rec.planned_pose);
    append(row, rec.true_pose);
    append(row, rec.commanded);
    append(row, rec.actual);
    append(row, rec.model_torque);
    append(row, rec.plant_torque);
    append_flags(row, rec.true_contact);
    append_flags(row, rec.believed_contact);
    std::array<bool, kLegCount> swing{};
    for (int l = 0; l < kLegCount; ++l) swing[l] = rec.role[l] == LegRole::Swing;
    append_flags(row, swing);
    row += "," + fixed(rec.comp_dz) + "," + fixed(rec.comp_alpha) + "," + fixed(rec.comp_beta);
    row += "," + std::to_string(rec.comp_iterations) + (rec.comp_converged ? ",1" : ",0");
    row += "," + join(rec.events, '|');
    return row;
}

void write_run_csv(std::ostream& out, const std::vector<TickRecord>& log) {
    out << join(run_csv_header(), ',') << '\n';
    for (const TickRecord& rec : log) out << run_csv_row(rec) << '\n';
}

void write_angles_csv(std::ostream& out, const std::vector<TickRecord>& log) {
    std::vector<std::string> h = {"tick", "time"};
    actuator_columns(h, "cmd");
    actuator_columns(h, "act");
    out << join(h, ',') << '\n';
    for (const TickRecord& rec : log) {
        std::string row = std::to_string(rec.tick) + "," + fixed(rec.time);
        append(row, rec.commanded);
        append(row, rec.actual);
        out << row << '\n';
    }
}

void write_torques_csv(std::ostream& out, const std::vector<TickRecord>& log) {
    std::vector<std::string> h = {"tick", "time"};
    actuator_columns(h, "model_tau");
    actuator_columns(h, "plant_tau");
    leg_columns(h, "swing");
    out << join(h, ',') << '\n';
    for (const TickRecord& rec : log) {
        std::string row = std::to_string(rec.tick) + "," + fixed(rec.time);
        append(row, rec.model_torque);
        append(row, rec.plant_torque);
        std::array<bool, kLegCount> swing{};
        for (int l = 0; l < kLegCount; ++l) swing[l] = rec.role[l] == LegRole::Swing;
        append_flags(row, swing);
        out << row << '\n';
    }
}

std::string summary_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["scenario"] = s.scenario;
    j["mode"] = s.mode;
    j["seed"] = s.seed;
    j["ticks"] = s.ticks;
    j["completed"] = s.completed;
    j["aborted"] = s.aborted;
    j["abort_reason"] = s.abort_reason;
    j["max_roll_deg"] = s.max_roll_deg;
    j["max_pitch_deg"] = s.max_pitch_deg;
    j["max_attitude_deviation_deg"] = s.max_attitude_deviation_deg;
    j["hang_events"] = s.total_hangs();
    j["overstep_events"] = s.total_oversteps();
    j["extend_down_steps"] = s.total_extends();
    nlohmann::ordered_json legs = nlohmann::ordered_json::object();
    for (int l = 0; l < kLegCount; ++l) {
        const LegCounts& c = s.legs[static_cast<std::size_t>(l)];
        legs[leg_code(l)] = {{"touches", c.touches},
                             {"extend_down", c.extends},
                             {"hangs", c.hangs},
                             {"oversteps", c.oversteps},
                             {"extends_per_touch", c.extends_per_touch}};
    }
    j["legs"] = legs;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [iters, count] : s.compensation.histogram) hist[std::to_string(iters)] = count;
    j["compensation"] = {{"solves", s.compensation.solves},
                         {"converged", s.compensation.converged},
                         {"fallbacks", s.compensation.fallbacks},
                         {"iterations_min", s.compensation.iterations_min},
                         {"iterations_median", s.compensation.iterations_median},
                         {"iterations_max", s.compensation.iterations_max},
                         {"histogram", hist}};
    j["final_x"] = s.final_x;
    j["goal_x"] = s.goal_x ? nlohmann::ordered_json(*s.goal_x) : nlohmann::ordered_json(nullptr);
    j["hold_ticks"] = s.hold_ticks;
    j["torque_fallbacks"] = s.torque_fallbacks;
    return j.dump(2) + "\n";
}

void write_log(const RunResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::ostringstream run;
    write_run_csv(run, result.log);
    write_file(dir / "run.csv", run.str());
    std::ostringstream angles;
    write_angles_csv(angles, result.log);
    write_file(dir / "angles.csv", angles.str());
    std::ostringstream torques;
    write_torques_csv(torques, result.log);
    write_file(dir / "torques.csv", torques.str());
    write_file(dir / "summary.json", summary_json(result.summary));
}

}  // namespace hexapod::harness
