// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hexapod/errors.hpp"
#include "hexapod/gait.hpp"
#include "hexapod/harness/runner.hpp"
#include "hexapod/harness/scenario.hpp"
#include "hexapod/harness/trace_log.hpp"
#include "hexapod/kinematics.hpp"
#include "hexapod/terrain_compensation.hpp"
#include "oracles.hpp"

using namespace hexapod;
using namespace hexapod::harness;
using std::numbers::pi;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(HEXAPOD_SOURCE_DIR) / "scenarios";
constexpr double kDeg = pi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Transform4 gait_at(double x, double y, double yaw, const RobotGeometry& g) {
    return translation(x, y, g.start_position.z()) * rotation(Axis::Z, yaw);
}

Vec24 stand_q(const RobotGeometry& g) {
    Vec24 q = Vec24::Zero();
    for (int l = 0; l < kLegCount; ++l) {
        const JointAngles a = body_endpoint_ik(g.legs[l].neutral, g, l);
        q.segment<3>(3 * l) << a.theta, a.phi, a.psi;
    }
    q[kActuatorCount + 2] = g.start_position.z();
    return q;
}

bool unimodal(const std::map<int, int>& histogram) {
    bool falling = false;
    int prev = 0;
    for (const auto& [iters, count] : histogram) {
        if (count < prev) falling = true;
        if (falling && count > prev) return false;
        prev = count;
    }
    return true;
}


Outcome kinematics_roundtrip() {
    const auto start = std::chrono::steady_clock::now();
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int leg = 0; leg < kLegCount; ++leg) {
        for (int n = 0; n < 10000;) {
            const JointAngles a = oracle::random_reachable_angles(rng);
            if (!oracle::usable_angles(a, g)) continue;
            const Vec3 p = oracle::planar_leg_fk(a, g, leg);
            const JointAngles sol = leg_ik({p, Frame::Leg}, g, leg);
            worst = std::max(worst, (leg_fk(sol, g, leg).position - p).norm());
            ++n;
        }
    }
    const double t = seconds_since(start);
    return {worst < 1e-9 && t < 5.0, format("60000 endpoints, max error %.2e mm, %.2f s", worst, t)};
}

Outcome push_invariance() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    const GaitParams params = select_gait("tripod");
    const TerrainModel flat = TerrainModel::flat();
    TerrainCompensator comp(CompensationMode::Full, {});
    GaitPhaseState gait;
    BodyChainState chain = BodyChainState::at_start(g.start_position);
    chain = advance_chain(chain, {}, {}, comp.update(chain.gait, flat, g));
    chain.prev_global_body = chain.global_body;

    std::array<Vec3, kLegCount> feet;
    std::array<Vec3, kLegCount> anchored;
    std::array<bool, kLegCount> pushing;
    for (int l = 0; l < kLegCount; ++l) {
        feet[l] = g.legs[l].neutral;
        anchored[l] = chain.global_body.apply(feet[l]);
        pushing[l] = true;
    }
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GaitCommand cmd;
    double total = 0.0;
    int samples = 0;
    for (int tick = 0; tick < 500; ++tick) {
        if (tick % 16 == 0) cmd = {60.0 * u(rng), 40.0 * u(rng), 0.3 * u(rng)};
        const StepPlan plan = gait_tick(cmd, gait, params);
        const GaitDelta& d = plan.body_delta;
        const Transform4 next = chain.gait * translation(d.dx, d.dy, 0.0) * rotation(Axis::Z, d.drot_z);
        chain = advance_chain(chain, d, {}, comp.update(next, flat, g));
        const Transform4 inc = body_increment(chain);
        for (int l = 0; l < kLegCount; ++l) {
            const LegStep& st = plan.legs[l];
            if (st.role == LegRole::Push) {
                feet[l] = update_push_endpoint(feet[l], inc);
                const Vec3 now = chain.global_body.apply(feet[l]);
                if (pushing[l]) {
                    total += (now - anchored[l]).norm();
                    ++samples;
                }
                anchored[l] = now;
                pushing[l] = true;
            } else {
                feet[l] = place_swing_endpoint(g.legs[l].neutral, chain, st.swing, st.z_gait, flat);
                pushing[l] = false;
            }
        }
    }
    return {total < 1e-6 && samples > 1000,
            format("%d pushing-foot ticks over 500 ticks, total drift %.2e mm", samples, total)};
}

Outcome flat_optimizer() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    const Transform4 pose = gait_at(35.0, -12.0, 0.4, g);
    const CompensationSolution s = compensate(pose, TerrainModel::flat(), g);
    const bool zero = std::abs(s.dz) < 0.01 && std::abs(s.alpha) < 0.01 && std::abs(s.beta) < 0.01;
    const bool identity = build_q_ter(s).is_approx(Transform4::identity(), 0.01);
    const CompensationSolution warm = compensate(pose, TerrainModel::flat(), g, {}, s);
    return {s.converged && zero && identity && warm.converged && warm.iterations <= 2,
            format("(dz, alpha, beta) = (%.1e, %.1e, %.1e), %d iterations from the solution", s.dz, s.alpha, s.beta,
                   warm.iterations)};
}

Outcome ramp_and_sinusoid_optimizer() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    const double gamma = 15.0 * kDeg;
    const TerrainModel ramp = TerrainModel::analytic("ramp", {0.0, gamma});
    std::optional<CompensationSolution> prev;
    bool monotone = true;
    double worst_step = 0.0;
    for (double x = -400.0; x <= 600.0; x += 2.0) {
        const CompensationSolution s = compensate(gait_at(x, 0, 0, g), ramp, g, {}, prev);
        if (!s.converged) monotone = false;
        if (prev) {
            if (s.alpha > prev->alpha + 1e-3) monotone = false;
            worst_step = std::max(worst_step, std::abs(s.alpha - prev->alpha));
        }
        prev = s;
    }
    // The nose-up pitch on a rising ramp is a negative rotation about y.
    const double pitch_error = std::abs(-prev->alpha - gamma) / kDeg;
    const bool continuous = worst_step < 0.01;

    const TerrainModel sinusoid = TerrainModel::analytic("sinusoid", {50.0, 100.0, 100.0});
    CompensationParams params;
    params.weight = 1e-5;
    params.tol = 0.01;
    TerrainCompensator comp(CompensationMode::Full, params);
    std::map<int, int> histogram;
    int converged = 0;
    const int solves = 600;
    for (int i = 0; i < solves; ++i) {
        comp.update(gait_at(2.0 * i, 40.0 * std::sin(i / 50.0), 0.1 * std::sin(i / 80.0), g), sinusoid, g);
        converged += comp.last_solve()->converged;
        ++histogram[comp.last_solve()->iterations];
    }
    const bool pass = pitch_error < 0.5 && monotone && continuous && converged == solves && unimodal(histogram);
    return {pass, format("ramp pitch error %.3f deg, max step %.4f rad, monotone %s; sinusoid %d/%d converged, "
                         "histogram %s",
                         pitch_error, worst_step, monotone ? "yes" : "no", converged, solves,
                         unimodal(histogram) ? "unimodal" : "multimodal")};
}

Outcome gradient_check() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    const TerrainModel sinusoid = TerrainModel::analytic("sinusoid", {50.0, 100.0, 100.0});
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Vec7 x;
        x << 20 * u(rng), u(rng), 1 + 0.3 * u(rng), 1 + 0.3 * u(rng), u(rng), 50 * u(rng), 50 * u(rng);
        const ShoulderSamples s = sample_shoulders(gait_at(300 * u(rng), 300 * u(rng), u(rng), g), x, sinusoid, g);
        const std::function<double(const Vec7&)> L = [&](const Vec7& y) { return lagrangian(y, s); };
        Vec7 numeric;
        for (int k = 0; k < 7; ++k) numeric[k] = oracle::partial(L, x, k);
        worst = std::max(worst, oracle::rel_error_vec(lagrangian_gradient(x, s), numeric));
    }
    return {worst < 1e-4, format("1000 states, max relative error %.2e", worst)};
}

Outcome dynamics_oracle() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        Vec24 q, qd, qdd;
        for (int i = 0; i < kStateSize; ++i) {
            q[i] = u(rng);
            qd[i] = u(rng);
            qdd[i] = 3 * u(rng);
        }
        q.segment<3>(kActuatorCount) = Vec3(50 * u(rng), 50 * u(rng), 100 + 50 * u(rng));
        qd.segment<3>(kActuatorCount) *= 50;
        const RobotState s = RobotState::from_vectors(q, qd, qdd);
        const TorqueComponents a = torque_components(s, g);
        const TorqueComponents o = fd_lagrangian_oracle(s, g);
        Vec24 ta, to;
        ta << a.actuated, a.body;
        to << o.actuated, o.body;
        worst = std::max(worst, oracle::rel_error_vec(ta, to));
    }

    RobotGeometry p = g;
    p.body = p.coxa = p.tibia = LinkInertial{};
    p.femur = LinkInertial{};
    p.femur.mass = 0.2;
    p.femur.com = Vec3(40.0, 0, 0);
    double pendulum = 0.0;
    for (double phi : {-0.7, 0.0, 0.4, 1.1}) {
        for (double accel : {0.0, 2.5, -8.0}) {
            Vec24 q = Vec24::Zero(), qd = Vec24::Zero(), qdd = Vec24::Zero();
            q[4] = phi;
            qd[4] = 1.3;
            qdd[4] = accel;
            // Positive femur angle lowers the link.
            const double expected = kEnergyToNmm * (0.2 * 1600.0 * accel - 0.2 * 9810.0 * 40.0 * std::cos(phi));
            const double got = torque_components(RobotState::from_vectors(q, qd, qdd), p).actuated[4];
            pendulum = std::max(pendulum, oracle::rel_error(got, expected, 1e-3));
        }
    }
    return {worst < 1e-5 && pendulum < 1e-4,
            format("100 states, max relative error %.2e; pendulum error %.2e", worst, pendulum)};
}

Outcome force_balance() {
    const RobotGeometry g = RobotGeometry::phantomx_defaults();
    const Vec24 q = stand_q(g);
    const TorqueComponents t = torque_components(RobotState::from_vectors(q), g);
    const double weight = g.total_mass() * 9.81;
    auto lift = [&](const ContactFlags& flags) {
        const TorqueVector tau = actuator_torque(t, assemble_constraints(q, g, flags));
        double z = 0.0;
        for (const Vec3& f : contact_forces(tau, t.actuated, q, g, flags)) z += f.z();
        return z;
    };
    const double six = lift({true, true, true, true, true, true});
    const double tri = lift({true, false, true, false, true, false});
    const double e6 = std::abs(six - weight) / weight;
    const double e3 = std::abs(tri - weight) / weight;
    return {e6 < 0.01 && e3 < 0.01,
            format("weight %.3f N; six legs %.3f N (%.2f%%), tripod %.3f N (%.2f%%)", weight, six, 100 * e6, tri,
                   100 * e3)};
}

Outcome torque_trace_shape() {
    Scenario s = load_scenario(kScenarios / "flat.toml");
    s.mode = ControlMode::OpenLoop;
    s.plant.noise_sigma = 0.0;
    const RunResult r = run_scenario(s);
    const int period = s.gait.cycle_ticks();
    const int femur = 1;  // right front
    const auto& log = r.log;

    // The first swing covers one and a half strides, so its landing differs from the steady ones. The
    // comparison starts from the third cycle.
    double worst_repeat = 0.0, scale = 0.0;
    for (std::size_t k = 2 * static_cast<std::size_t>(period); k + static_cast<std::size_t>(period) < log.size(); ++k) {
        worst_repeat = std::max(worst_repeat,
                                (log[k + static_cast<std::size_t>(period)].plant_torque - log[k].plant_torque).norm());
        scale = std::max(scale, log[k].plant_torque.norm());
    }
    const bool periodic = worst_repeat < 1e-3 * scale;

    int cycles = 0, loaded_cycles = 0;
    for (std::size_t c = 0; c + static_cast<std::size_t>(period) <= log.size(); c += static_cast<std::size_t>(period)) {
        double push = 0.0, swing = 0.0;
        int np = 0, ns = 0;
        for (std::size_t k = c; k < c + static_cast<std::size_t>(period); ++k) {
            const double m = std::abs(log[k].plant_torque[femur]);
            if (log[k].role[0] == LegRole::Push) {
                push += m;
                ++np;
            } else {
                swing += m;
                ++ns;
            }
        }
        if (np == 0 || ns == 0) continue;
        ++cycles;
        loaded_cycles += push / np > swing / ns;
    }
    return {periodic && cycles >= 5 && loaded_cycles == cycles,
            format("period %d ticks, repeat error %.1e of %.1f N mm; push > swing in %d/%d cycles", period,
                   worst_repeat, scale, loaded_cycles, cycles)};
}

Outcome obstacle() {
    const auto start = std::chrono::steady_clock::now();
    Scenario s = load_scenario(kScenarios / "obstacle.toml");
    const RunResult closed = run_scenario(s);
    s.mode = ControlMode::OpenLoop;
    const RunResult open = run_scenario(s);
    const double t = seconds_since(start);
    int plateaus = 0, open_plateaus = 0;
    for (int leg = 0; leg < kLegCount; ++leg) {
        plateaus += static_cast<int>(femur_plateaus(closed.log, leg).size());
        open_plateaus += static_cast<int>(femur_plateaus(open.log, leg).size());
    }
    const RunSummary& c = closed.summary;
    const RunSummary& o = open.summary;
    const bool pass = c.completed && c.total_oversteps() == 0 && c.max_roll_deg < 2.0 && c.max_pitch_deg < 2.0 &&
                      plateaus > 0 && o.total_oversteps() >= 1 && o.max_attitude_deviation_deg > 5.0 && t < 60.0;
    return {pass, format("closed: %d oversteps, roll %.2f deg, pitch %.2f deg, %d femur plateaus; open: %d oversteps, "
                         "attitude deviation %.2f deg, %d plateaus; %.2f s",
                         c.total_oversteps(), c.max_roll_deg, c.max_pitch_deg, plateaus, o.total_oversteps(),
                         o.max_attitude_deviation_deg, open_plateaus, t)};
}

Outcome ramp() {
    Scenario s = load_scenario(kScenarios / "ramp.toml");
    const RunResult closed = run_scenario(s);
    s.mode = ControlMode::OpenLoop;
    const RunResult open = run_scenario(s);
    const RunSummary& c = closed.summary;
    const RunSummary& o = open.summary;
    const bool pass = c.completed && c.total_hangs() == 0 && c.max_pitch_deg < 2.0 && o.total_hangs() >= 1;
    return {pass, format("closed: reached x = %.1f of %.1f mm, %d hangs, max pitch %.2f deg; open: %d hangs", c.final_x,
                         s.goal_x.value_or(0.0), c.total_hangs(), c.max_pitch_deg, o.total_hangs())};
}

Outcome extend_down_count() {
    const Scenario s = load_scenario(kScenarios / "pit.toml");
    const RunResult r = run_scenario(s);
    const std::vector<int>& rf = r.summary.legs[0].extends_per_touch;
    bool all_three = !rf.empty();
    std::string list;
    for (int n : rf) {
        all_three = all_three && n == 3;
        list += (list.empty() ? "" : ",") + std::to_string(n);
    }
    return {r.summary.completed && all_three, "right front extensions per touch in the pit: [" + list + "]"};
}

Outcome determinism() {
    const Scenario s = load_scenario(kScenarios / "obstacle.toml");
    const auto base = std::filesystem::temp_directory_path() / "hexapod_acceptance";
    std::filesystem::remove_all(base);
    write_log(run_scenario(s), base / "a");
    write_log(run_scenario(s), base / "b");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    bool same = true;
    std::size_t bytes = 0;
    for (const char* f : {"run.csv", "angles.csv", "torques.csv", "summary.json"}) {
        const std::string a = slurp(base / "a" / f);
        same = same && !a.empty() && a == slurp(base / "b" / f);
        bytes += a.size();
    }
    std::filesystem::remove_all(base);
    return {same, format("%zu bytes of logs, identical: %s", bytes, same ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"kinematics roundtrip", kinematics_roundtrip},
        {"pushing endpoint invariance", push_invariance},
        {"terrain optimizer, flat", flat_optimizer},
        {"terrain optimizer, ramp and sinusoid", ramp_and_sinusoid_optimizer},
        {"gradient check", gradient_check},
        {"dynamics oracle equivalence", dynamics_oracle},
        {"static force balance", force_balance},
        {"torque trace shape", torque_trace_shape},
        {"obstacle scenario", obstacle},
        {"ramp scenario", ramp},
        {"extend-down counting", extend_down_count},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
