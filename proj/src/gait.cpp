#include "hexapod/gait.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hexapod/errors.hpp"

namespace hexapod {

namespace {

int phase_of(const GaitParams& p, long tick) {
    return static_cast<int>((tick / p.steps_per_phase) % p.phase_count);
}

int phases_since_swing_start(const GaitParams& p, int leg, long tick) {
    const int ph = phase_of(p, tick);
    return ((ph - p.start_phase[static_cast<std::size_t>(leg)]) % p.phase_count + p.phase_count) % p.phase_count;
}

Eigen::Vector2d rotate2(double angle, const Eigen::Vector2d& v) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Swing target from neutral; a push of push_ticks from here ends symmetrically behind.
SwingDisplacement swing_target(const GaitCommand& cmd, const GaitParams& p) {
    const int n = p.push_ticks();
    const double dr = cmd.wz * p.dt;
    const Eigen::Vector2d dv(cmd.vx * p.dt, cmd.vy * p.dt);
    SwingDisplacement t;
    t.rot_z = dr * n / 2.0;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int k = 0; k < n; ++k) {
        sum += rotate2(-(t.rot_z - k * dr), dv);
    }
    t.x = 0.5 * sum.x();
    t.y = 0.5 * sum.y();
    return t;
}

double altitude(double lift, int lowering_ticks, int s, int total) {
    const int rise = total - lowering_ticks;
    if (rise <= 0) {
        return lift * static_cast<double>(total - s) / total;
    }
    if (s <= rise) {
        return lift * static_cast<double>(s) / rise;
    }
    return lift * static_cast<double>(total - s) / lowering_ticks;
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

void GaitParams::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw InvalidArgument("gait." + field + ": " + msg);
    };
    if (phase_count < 2) fail("phase_count", "needs at least 2 phases");
    if (swing_phases < 1 || swing_phases >= phase_count) fail("swing_phases", "must lie in [1, phase_count)");
    for (int s : start_phase) {
        if (s < 0 || s >= phase_count) fail("start_phase", "out of range");
    }
    if (steps_per_phase < 1) fail("steps_per_phase", "must be positive");
    if (lowering_ticks < 1 || lowering_ticks > swing_ticks()) fail("lowering_ticks", "must lie in [1, swing ticks]");
    if (!(lift_height >= 0.0)) fail("lift_height", "must be non-negative");
    if (!(dt > 0.0)) fail("dt", "must be positive");
    if (!(max_vx >= 0.0) || !(max_vy >= 0.0) || !(max_wz >= 0.0)) fail("max_speed", "must be non-negative");
    const double push_time = push_ticks() * dt;
    if (max_vx * push_time > max_stride || max_vy * push_time > max_stride) {
        fail("max_stride", "speed limits allow a stride longer than the workspace allows");
    }
    if (max_wz * push_time > 0.5) fail("max_wz", "yaw per push phase exceeds 0.5 rad");
}

GaitParams select_gait(const std::string& name) {
    GaitParams p;
    p.name = name;
    if (name == "tripod") {
        p.phase_count = 2;
        p.swing_phases = 1;
        p.start_phase = {0, 1, 0, 1, 0, 1};
    } else if (name == "wave") {
        p.phase_count = 6;
        p.swing_phases = 1;
        // RR, RM, RF, LR, LM, LF
        p.start_phase = {2, 1, 0, 5, 4, 3};
        p.max_vx = p.max_vy = 60.0;
        p.max_wz = 0.3;
    } else if (name == "ripple") {
        p.phase_count = 6;
        p.swing_phases = 2;
        // LF, RM, LR, RF, LM, RR
        p.start_phase = {3, 1, 5, 0, 4, 2};
        p.max_vx = p.max_vy = 80.0;
        p.max_wz = 0.4;
    } else {
        throw InvalidArgument("unknown gait '" + name + "' (expected tripod, ripple or wave)");
    }
    p.validate();
    return p;
}

int StepPlan::push_count() const {
    return static_cast<int>(std::count_if(legs.begin(), legs.end(), [](const LegStep& l) { return l.role == LegRole::Push; }));
}

int GaitPhaseState::phase(const GaitParams& params) const { return phase_of(params, tick); }

bool GaitPhaseState::at_phase_boundary(const GaitParams& params) const { return tick % params.steps_per_phase == 0; }

LegRole leg_role(const GaitParams& params, int leg, long tick) {
    require_leg_index(leg);
    return phases_since_swing_start(params, leg, tick) < params.swing_phases ? LegRole::Swing : LegRole::Push;
}

int swing_tick_index(const GaitParams& params, int leg, long tick) {
    if (leg_role(params, leg, tick) != LegRole::Swing) {
        return 0;
    }
    return phases_since_swing_start(params, leg, tick) * params.steps_per_phase +
           static_cast<int>(tick % params.steps_per_phase) + 1;
}

double swing_altitude(const GaitParams& params, int swing_tick) {
    return altitude(params.lift_height, params.lowering_ticks, swing_tick, params.swing_ticks());
}

GaitCommand saturate(const GaitCommand& cmd, const GaitParams& params, bool* saturated) {
    if (!std::isfinite(cmd.vx) || !std::isfinite(cmd.vy) || !std::isfinite(cmd.wz)) {
        throw InvalidArgument("gait command must be finite");
    }
    GaitCommand out{std::clamp(cmd.vx, -params.max_vx, params.max_vx),
                    std::clamp(cmd.vy, -params.max_vy, params.max_vy),
                    std::clamp(cmd.wz, -params.max_wz, params.max_wz)};
    if (saturated) {
        *saturated = out.vx != cmd.vx || out.vy != cmd.vy || out.wz != cmd.wz;
    }
    return out;
}

StepPlan gait_tick(const GaitCommand& raw, GaitPhaseState& state, const GaitParams& params) {
    StepPlan plan;
    plan.command = saturate(raw, params, &plan.saturated);
    plan.dt = params.dt;
    plan.tick = state.tick;
    plan.phase = state.phase(params);

    const GaitCommand& cmd = plan.command;
    const bool airborne = std::any_of(state.swing_entry.begin(), state.swing_entry.end(), [](int e) { return e > 0; });
    if (cmd.is_zero() && state.at_phase_boundary(params) && !airborne) {
        return plan;  // hold: everyone pushes with zero deltas
    }

    plan.body_delta = {cmd.vx * params.dt, cmd.vy * params.dt, cmd.wz * params.dt};
    const GaitDelta foot{-plan.body_delta.dx, -plan.body_delta.dy, -plan.body_delta.drot_z};
    const SwingDisplacement target = swing_target(cmd, params);
    const int total = params.swing_ticks();

    for (int leg = 0; leg < kLegCount; ++leg) {
        const auto i = static_cast<std::size_t>(leg);
        LegStep& step = plan.legs[i];
        SwingDisplacement& disp = state.displacement[i];
        const int s = swing_tick_index(params, leg, state.tick);
        if (s == 0) {
            step.role = LegRole::Push;
            step.push_delta = foot;
            const Eigen::Vector2d dt = rotate2(-disp.rot_z, Eigen::Vector2d(plan.body_delta.dx, plan.body_delta.dy));
            disp.rot_z -= plan.body_delta.drot_z;
            disp.x -= dt.x();
            disp.y -= dt.y();
            step.swing = disp;
            continue;
        }
        // A swing entered part-way (first tick of a run) is compressed into the remaining ticks.
        if (state.swing_entry[i] == 0) {
            state.swing_entry[i] = s;
            state.liftoff[i] = disp;
        }
        const int s0 = state.swing_entry[i];
        const int local = s - s0 + 1;
        const int local_total = total - s0 + 1;
        const double frac = static_cast<double>(local) / local_total;
        const SwingDisplacement& from = state.liftoff[i];
        disp.x = from.x + (target.x - from.x) * frac;
        disp.y = from.y + (target.y - from.y) * frac;
        disp.rot_z = from.rot_z + (target.rot_z - from.rot_z) * frac;

        step.role = LegRole::Swing;
        step.swing = disp;
        step.swing_tick = s;
        step.z_gait = altitude(params.lift_height, std::min(params.lowering_ticks, local_total), local, local_total);
        step.lowering = s > total - params.lowering_ticks;
        step.swing_complete = s == total;
        if (step.swing_complete) {
            state.swing_entry[i] = 0;
        }
    }
    ++state.tick;
    return plan;
}

double stability_margin(const GaitParams& params, const RobotGeometry& geom, int phase) {
    if (phase < 0 || phase >= params.phase_count) {
        throw InvalidArgument("phase index out of range");
    }
    const long tick = static_cast<long>(phase) * params.steps_per_phase;
    std::vector<Eigen::Vector2d> pts;
    for (int leg = 0; leg < kLegCount; ++leg) {
        if (leg_role(params, leg, tick) == LegRole::Push) {
            const Vec3& n = geom.legs[static_cast<std::size_t>(leg)].neutral;
            pts.emplace_back(n.x(), n.y());
        }
    }
    if (pts.size() < 3) {
        return -std::numeric_limits<double>::infinity();
    }
    // Monotone-chain convex hull, counter-clockwise.
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);

    double margin = std::numeric_limits<double>::infinity();
    const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Eigen::Vector2d& a = hull[i];
        const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
        margin = std::min(margin, cross2(a, b, origin) / (b - a).norm());
    }
    return margin;
}

}  // namespace hexapod
