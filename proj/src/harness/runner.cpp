#include "hexapod/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hexapod/errors.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod::harness {

int RunSummary::total_hangs() const {
    int n = 0;
    for (const LegCounts& c : legs) n += c.hangs;
    return n;
}

int RunSummary::total_oversteps() const {
    int n = 0;
    for (const LegCounts& c : legs) n += c.oversteps;
    return n;
}

int RunSummary::total_extends() const {
    int n = 0;
    for (const LegCounts& c : legs) n += c.extends;
    return n;
}

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct SwingTrack {
    int entry = 0;                 ///< swing tick at lift-off
    Vec3 offset = Vec3::Zero();    ///< lift-off foot minus the planned lift-off point, global
    bool target_done = false;      ///< planned swing finished without touching
};

class Runner {
public:
    explicit Runner(const Scenario& s)
        : s_(s),
          geom_(s.geometry),
          plant_(s.geometry, s.true_terrain, s.plant, s.seed),
          compensator_(s.compensation, s.compensation_params),
          controller_(s.control) {}

    RunResult run();

private:
    Vec3 swing_point(int leg, const LegStep& step, const SwingTrack& track) const;
    void evaluate_landings(const StepPlan& prev, TickRecord& rec);
    void abort(const std::string& reason, TickRecord* rec);
    void add_event(TickRecord& rec, int leg, const std::string& what) const {
        rec.events.push_back(leg_code(leg) + ":" + what);
    }

    const Scenario& s_;
    const RobotGeometry& geom_;
    Plant plant_;
    TerrainCompensator compensator_;
    TouchController controller_;
    TorqueEstimator model_estimator_;
    GaitPhaseState gait_state_;
    BodyChainState chain_;
    std::array<Vec3, kLegCount> endpoints_{};
    std::array<SwingTrack, kLegCount> tracks_{};
    RunResult result_;
};

Vec3 Runner::swing_point(int leg, const LegStep& step, const SwingTrack& track) const {
    const int total = s_.gait.swing_ticks();
    const int local = step.swing_tick - track.entry + 1;
    const int local_total = total - track.entry + 1;
    const double w_xy = 1.0 - static_cast<double>(local) / local_total;
    Vec3 g = swing_global_xy(geom_.legs[static_cast<std::size_t>(leg)].neutral, chain_, step.swing);
    g.x() += w_xy * track.offset.x();
    g.y() += w_xy * track.offset.y();
    const double ground = elevation(s_.believed, g.x(), g.y());
    if (track.offset.z() > 0.0) {
        // A foot lifting off above the believed ground rises from where it is, without
        // climbing past the usual apex unless the lift-off point is already higher.
        const int lowering = std::min(s_.gait.lowering_ticks, local_total);
        const int into = step.swing_tick - (total - lowering);
        const double w_z = into > 0 ? 1.0 - static_cast<double>(into) / lowering : 1.0;
        const double raised = w_z * track.offset.z();
        const double apex = std::max(s_.gait.lift_height, raised);
        g.z() = ground + std::max(step.z_gait, std::min(raised + step.z_gait, apex));
    } else {
        g.z() = ground + step.z_gait + w_xy * track.offset.z();
    }
    return chain_.global_body.inverse().apply(g);
}

// A leg about to push is checked against the true ground, with the body resting on the legs
// already pushing and every foot where the controller commands it.
void Runner::evaluate_landings(const StepPlan& prev, TickRecord& rec) {
    const PlantState& ps = plant_.state();
    std::vector<Vec3> stance;
    std::vector<Vec3> shifts;
    for (int l = 0; l < kLegCount; ++l) {
        if (prev.legs[static_cast<std::size_t>(l)].role == LegRole::Push) {
            stance.push_back(endpoints_[l]);
            shifts.push_back(ps.foot_shift[static_cast<std::size_t>(l)]);
        }
    }
    const Transform4 body = settle_body(chain_.global_body, stance, s_.true_terrain, s_.plant.max_tilt, shifts);
    for (int l = 0; l < kLegCount; ++l) {
        const LegStep& st = prev.legs[static_cast<std::size_t>(l)];
        if (st.role != LegRole::Swing || !st.swing_complete) continue;
        const double c = foot_clearance(body, endpoints_[l], s_.true_terrain, ps.drift);
        LegCounts& counts = result_.summary.legs[static_cast<std::size_t>(l)];
        if (c > s_.event_threshold) {
            ++counts.hangs;
            add_event(rec, l, "hang");
        } else if (c < -s_.event_threshold) {
            ++counts.oversteps;
            add_event(rec, l, "overstep");
        }
    }
}

void Runner::abort(const std::string& reason, TickRecord* rec) {
    result_.summary.aborted = true;
    result_.summary.abort_reason = reason;
    if (rec) rec->events.push_back("abort");
}

RunResult Runner::run() {
    RunSummary& sum = result_.summary;
    sum.scenario = s_.name;
    sum.mode = to_string(s_.mode);
    sum.seed = s_.seed;
    sum.goal_x = s_.goal_x;
    const bool closed = s_.mode == ControlMode::ClosedLoop;
    const UserPose user;

    chain_ = BodyChainState::at_start(geom_.start_position);
    const Transform4 q0 = compensator_.update(chain_.gait, s_.believed, geom_);
    chain_ = advance_chain(chain_, {}, user, q0);
    chain_.prev_global_body = chain_.global_body;

    Vec18 commanded = Vec18::Zero();
    try {
        for (int l = 0; l < kLegCount; ++l) {
            endpoints_[l] = place_swing_endpoint(geom_.legs[static_cast<std::size_t>(l)].neutral, chain_, {}, 0.0,
                                                 s_.believed);
            const JointAngles a = body_endpoint_ik(endpoints_[l], geom_, l);
            commanded.segment<3>(3 * l) << a.theta, a.phi, a.psi;
        }
    } catch (const ReachabilityError& e) {
        abort(std::string("initial stance unreachable: ") + e.what(), nullptr);
        return result_;
    }
    plant_.reset(commanded, chain_.global_body);

    StepPlan prev_plan;  // everyone pushing
    std::array<LegRole, kLegCount> prev_role{};
    const double dt = s_.dt();
    const long ticks = s_.tick_count();

    for (long i = 1; i <= ticks && !sum.aborted; ++i) {
        TickRecord rec;
        rec.tick = i;
        rec.time = static_cast<double>(i) * dt;

        bool hold = false;
        if (closed) {
            for (int l = 0; l < kLegCount; ++l) {
                if (tracks_[l].target_done && !controller_.leg(l).touched) hold = true;
            }
        }
        rec.held = hold;

        StepPlan plan;
        if (!hold) {
            evaluate_landings(prev_plan, rec);
            plan = gait_tick(s_.command_at(rec.time), gait_state_, s_.gait);
            const GaitDelta& d = plan.body_delta;
            const Transform4 gait_next = chain_.gait * translation(d.dx, d.dy, 0.0) * rotation(Axis::Z, d.drot_z);
            const Transform4 q_ter = compensator_.update(gait_next, s_.believed, geom_);
            chain_ = advance_chain(chain_, d, user, q_ter);
            if (s_.compensation != CompensationMode::Off && compensator_.last_solve()) {
                CompensationStats& cs = sum.compensation;
                ++cs.solves;
                if (compensator_.last_solve()->converged) ++cs.converged;
                if (compensator_.last_fell_back()) ++cs.fallbacks;
                ++cs.histogram[compensator_.last_solve()->iterations];
            }
        } else {
            plan = prev_plan;
            for (LegStep& st : plan.legs) st.lowering = false;
            chain_.prev_global_body = chain_.global_body;
            ++sum.hold_ticks;
        }

        const Transform4 q_body = body_increment(chain_);
        try {
            for (int l = 0; l < kLegCount; ++l) {
                const auto li = static_cast<std::size_t>(l);
                const LegStep& st = plan.legs[li];
                SwingTrack& track = tracks_[li];
                if (!hold) {
                    if (st.role == LegRole::Push) {
                        if (prev_role[li] == LegRole::Swing) {
                            controller_.release(l);
                            track = SwingTrack{};
                        }
                        endpoints_[l] = update_push_endpoint(endpoints_[l], q_body);
                    } else if (closed && controller_.leg(l).touched) {
                        endpoints_[l] = update_push_endpoint(endpoints_[l], q_body);
                    } else {
                        if (prev_role[li] == LegRole::Push) {
                            track = SwingTrack{};
                            track.entry = st.swing_tick;
                            const Vec3 foot = chain_.prev_global_body.apply(endpoints_[l]);
                            Vec3 planned = swing_global_xy(geom_.legs[li].neutral, chain_, gait_state_.liftoff[li]);
                            planned.z() = elevation(s_.believed, planned.x(), planned.y());
                            track.offset = foot - planned;
                        }
                        endpoints_[l] = swing_point(l, st, track);
                        if (closed && st.lowering) controller_.begin_lowering(l);
                        if (closed && st.swing_complete) track.target_done = true;
                    }
                    prev_role[li] = st.role;
                }
                const JointAngles a = body_endpoint_ik(endpoints_[l], geom_, l);
                commanded.segment<3>(3 * l) << a.theta, a.phi, a.psi;
                rec.role[li] = st.role;
                rec.lowering[li] = st.lowering;
            }
        } catch (const ReachabilityError& e) {
            abort(std::string("commanded endpoint unreachable: ") + e.what(), &rec);
            rec.planned_pose = pose_vector(chain_.global_body);
            result_.log.push_back(rec);
            break;
        }

        plant_.step(commanded, chain_.global_body);
        const SensorReading reading = plant_.read(i);
        for (int l : plant_.state().new_contacts) add_event(rec, l, "contact");

        ContactFlags believed{};
        for (int l = 0; l < kLegCount; ++l) {
            believed[l] = plan.legs[static_cast<std::size_t>(l)].role == LegRole::Push ||
                          (closed && controller_.leg(l).touched);
        }
        Vec24 q_model;
        q_model.head<kActuatorCount>() = reading.angles;
        q_model.tail<6>() = pose_vector(chain_.global_body);
        const TorqueComponents model = torque_components(RobotState::from_vectors(q_model), geom_);
        rec.model_torque = model_estimator_.estimate(model, assemble_constraints(q_model, geom_, believed));

        if (closed) {
            std::array<bool, kLegCount> target_done{};
            for (int l = 0; l < kLegCount; ++l) target_done[l] = tracks_[l].target_done;
            const std::vector<TouchDecision> decisions =
                controller_.lowering_step(model, q_model, believed, target_done, reading, plant_, geom_, endpoints_);
            for (const TouchDecision& d : decisions) {
                LegCounts& counts = sum.legs[static_cast<std::size_t>(d.leg)];
                switch (d.outcome) {
                    case TouchOutcome::Touched:
                        ++counts.touches;
                        counts.extends_per_touch.push_back(controller_.leg(d.leg).extend_count);
                        tracks_[d.leg].target_done = false;
                        believed[d.leg] = true;
                        add_event(rec, d.leg, "touched");
                        break;
                    case TouchOutcome::ExtendDown:
                        ++counts.extends;
                        add_event(rec, d.leg, "extend_down");
                        break;
                    case TouchOutcome::Unreachable:
                        add_event(rec, d.leg, "unreachable");
                        abort("unreachable ground under leg " + leg_code(d.leg), &rec);
                        break;
                    case TouchOutcome::KeepLowering:
                        break;
                }
            }
        }

        const PlantState& ps = plant_.state();
        rec.planned_pose = pose_vector(chain_.global_body);
        rec.true_pose = pose_vector(ps.world_body());
        rec.commanded = ps.commanded;
        rec.actual = ps.actual;
        rec.plant_torque = reading.torques;
        rec.true_contact = ps.grounded;
        rec.believed_contact = believed;
        if (s_.compensation != CompensationMode::Off) {
            const CompensationSolution& active = compensator_.active();
            rec.comp_dz = active.dz;
            rec.comp_alpha = active.alpha;
            rec.comp_beta = active.beta;
            if (compensator_.last_solve()) {
                rec.comp_iterations = compensator_.last_solve()->iterations;
                rec.comp_converged = compensator_.last_solve()->converged;
            }
        }

        sum.max_roll_deg = std::max(sum.max_roll_deg, std::abs(rec.true_pose[3]) * kDeg);
        sum.max_pitch_deg = std::max(sum.max_pitch_deg, std::abs(rec.true_pose[4]) * kDeg);
        const double dev = std::max(std::abs(wrap_angle(rec.true_pose[3] - rec.planned_pose[3])),
                                    std::abs(wrap_angle(rec.true_pose[4] - rec.planned_pose[4])));
        sum.max_attitude_deviation_deg = std::max(sum.max_attitude_deviation_deg, dev * kDeg);

        if (!hold) prev_plan = plan;
        result_.log.push_back(std::move(rec));
        // The walk is over once the body gets to the goal.
        if (s_.goal_x && ps.world_body().translation().x() >= *s_.goal_x) break;
    }

    sum.ticks = static_cast<long>(result_.log.size());
    sum.final_x = plant_.state().world_body().translation().x();
    sum.torque_fallbacks = plant_.torque_fallbacks() + model_estimator_.fallback_count();
    CompensationStats& cs = sum.compensation;
    if (!cs.histogram.empty()) {
        cs.iterations_min = cs.histogram.begin()->first;
        cs.iterations_max = cs.histogram.rbegin()->first;
        int seen = 0;
        for (const auto& [iters, count] : cs.histogram) {
            seen += count;
            if (2 * seen >= cs.solves) {
                cs.iterations_median = iters;
                break;
            }
        }
    }
    sum.completed = !sum.aborted;
    if (sum.completed && s_.goal_x) sum.completed = sum.final_x >= *s_.goal_x;
    if (sum.completed && s_.max_attitude_deg) {
        sum.completed = std::max(sum.max_roll_deg, sum.max_pitch_deg) <= *s_.max_attitude_deg;
    }
    return result_;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
    scenario.validate();
    Runner runner(scenario);
    return runner.run();
}

std::vector<long> femur_plateaus(const std::vector<TickRecord>& log, int leg, double still, int min_ticks) {
    require_leg_index(leg);
    const auto li = static_cast<std::size_t>(leg);
    const int femur = 3 * leg + 1;
    std::vector<long> out;
    std::size_t k = 1;
    while (k < log.size()) {
        if (log[k].role[li] != LegRole::Swing) {
            ++k;
            continue;
        }
        int run = 0;
        bool found = false;
        for (; k < log.size() && log[k].role[li] == LegRole::Swing; ++k) {
            run = std::abs(log[k].actual[femur] - log[k - 1].actual[femur]) <= still ? run + 1 : 0;
            if (run == min_ticks && !found) {
                out.push_back(log[k - static_cast<std::size_t>(min_ticks) + 1].tick);
                found = true;
            }
        }
    }
    return out;
}

}  // namespace hexapod::harness
