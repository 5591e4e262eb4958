#include "hexapod/control.hpp"

#include <algorithm>
#include <cmath>

#include "hexapod/errors.hpp"

namespace hexapod {

std::string to_string(TouchOutcome outcome) {
    switch (outcome) {
        case TouchOutcome::Touched:
            return "touched";
        case TouchOutcome::KeepLowering:
            return "keep_lowering";
        case TouchOutcome::ExtendDown:
            return "extend_down";
        case TouchOutcome::Unreachable:
            return "unreachable";
    }
    return "unknown";
}

void CorrespondenceConfig::validate() const {
    if (!(relative > 0.0)) throw ConfigError("control.relative_threshold must be positive", "control.relative_threshold");
    if (!(absolute_floor >= 0.0)) throw ConfigError("control.absolute_floor must be non-negative", "control.absolute_floor");
    if (!(lowering_increment > 0.0)) {
        throw ConfigError("control.lowering_increment must be positive", "control.lowering_increment");
    }
    if (!(max_extend >= 0.0)) throw ConfigError("control.max_extend must be non-negative", "control.max_extend");
}

TorqueVector expected_touch_torque(const TorqueComponents& model, const Vec24& q, const RobotGeometry& geom,
                                   ContactFlags flags, int leg) {
    require_leg_index(leg);
    flags[static_cast<std::size_t>(leg)] = true;
    return actuator_torque(model, assemble_constraints(q, geom, flags));
}

TorqueVector expected_touch_torque(const RobotState& state, const RobotGeometry& geom, const ContactFlags& flags,
                                   int leg) {
    return expected_touch_torque(torque_components(state, geom), state.q(), geom, flags, leg);
}

bool correspondence(const TorqueVector& expected, const TorqueVector& sensed, const CorrespondenceConfig& cfg,
                    int leg) {
    require_leg_index(leg);
    for (int j = 3 * leg; j < 3 * leg + 3; ++j) {
        const double band = std::max(cfg.relative * std::abs(expected[j]), cfg.absolute_floor);
        if (!(std::abs(sensed[j] - expected[j]) <= band)) {
            return false;
        }
    }
    return true;
}

LegEndpoint resync_endpoint(int leg, const JointAngles& measured, const RobotGeometry& geom) {
    require_leg_index(leg);
    return {foot_in_body(measured, geom, leg), Frame::Body};
}

TouchController::TouchController(CorrespondenceConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void TouchController::begin_lowering(int leg) {
    require_leg_index(leg);
    LegTouchState& s = legs_[static_cast<std::size_t>(leg)];
    if (!s.lowering && !s.touched) {
        s = LegTouchState{};
        s.lowering = true;
    }
}

void TouchController::release(int leg) {
    require_leg_index(leg);
    legs_[static_cast<std::size_t>(leg)] = LegTouchState{};
}

const LegTouchState& TouchController::leg(int leg) const {
    require_leg_index(leg);
    return legs_[static_cast<std::size_t>(leg)];
}

bool TouchController::matches(const TorqueComponents& model, const Vec24& q, const ContactFlags& grounded, int leg,
                              const std::vector<int>& others, const TorqueVector& sensed,
                              const RobotGeometry& geom) const {
    // Legs lowering at the same time may touch together; try every combination of them.
    // A grounded leg may also have been unloaded by terrain the model does not know about,
    // so each combination is also tried with one grounded leg released.
    std::vector<int> releases{-1};
    for (int o = 0; o < kLegCount; ++o) {
        if (o != leg && grounded[static_cast<std::size_t>(o)]) releases.push_back(o);
    }
    const unsigned combos = 1u << others.size();
    for (int released : releases) {
        for (unsigned mask = 0; mask < combos; ++mask) {
            ContactFlags flags = grounded;
            if (released >= 0) flags[static_cast<std::size_t>(released)] = false;
            for (std::size_t k = 0; k < others.size(); ++k) {
                if (mask & (1u << k)) {
                    flags[static_cast<std::size_t>(others[k])] = true;
                }
            }
            try {
                if (correspondence(expected_touch_torque(model, q, geom, flags, leg), sensed, cfg_, leg)) {
                    return true;
                }
            } catch (const RankDeficiencyError&) {
                // Hypothetical support too small to carry the body: not a match.
            }
        }
    }
    return false;
}

bool TouchController::unloaded(const TorqueComponents& model, const Vec24& q, const ContactFlags& grounded, int leg,
                               const TorqueVector& sensed, const RobotGeometry& geom) const {
    ContactFlags flags = grounded;
    flags[static_cast<std::size_t>(leg)] = false;
    try {
        return correspondence(actuator_torque(model, assemble_constraints(q, geom, flags)), sensed, cfg_, leg);
    } catch (const RankDeficiencyError&) {
        return true;  // no load model without support; trust the position check alone
    }
}

std::vector<TouchDecision> TouchController::lowering_step(const TorqueComponents& model, const Vec24& q,
                                                          ContactFlags grounded,
                                                          const std::array<bool, kLegCount>& target_done,
                                                          const SensorReading& reading, TorqueSource& source,
                                                          const RobotGeometry& geom,
                                                          std::array<Vec3, kLegCount>& endpoints) {
    std::vector<TouchDecision> out;
    for (int l = 0; l < kLegCount; ++l) {
        if (legs_[static_cast<std::size_t>(l)].touched) {
            grounded[static_cast<std::size_t>(l)] = true;
        }
    }
    for (int l = 0; l < kLegCount; ++l) {
        const auto i = static_cast<std::size_t>(l);
        LegTouchState& s = legs_[i];
        if (!s.lowering || s.touched) {
            continue;
        }
        std::vector<int> others;
        for (int o = 0; o < kLegCount; ++o) {
            const auto oi = static_cast<std::size_t>(o);
            if (o != l && legs_[oi].lowering && !legs_[oi].touched && !grounded[oi]) {
                others.push_back(o);
            }
        }

        TouchDecision d;
        d.leg = l;
        if (matches(model, q, grounded, l, others, reading.torques, geom)) {
            source.stop_leg(l);
            const JointAngles measured{reading.angles[3 * l], reading.angles[3 * l + 1], reading.angles[3 * l + 2]};
            d.measured = resync_endpoint(l, measured, geom);
            endpoints[i] = d.measured.position;
            d.outcome = TouchOutcome::Touched;
            s.touched = true;
            s.lowering = false;
            grounded[i] = true;
        } else if (target_done[i] && !reading.moving[i] && unloaded(model, q, grounded, l, reading.torques, geom)) {
            Vec3 next = endpoints[i];
            next.z() -= cfg_.lowering_increment;
            d.outcome = TouchOutcome::ExtendDown;
            if (s.extension + cfg_.lowering_increment > cfg_.max_extend + 1e-9) {
                d.outcome = TouchOutcome::Unreachable;
            } else {
                try {
                    body_endpoint_ik(next, geom, l);
                } catch (const ReachabilityError&) {
                    d.outcome = TouchOutcome::Unreachable;
                }
            }
            if (d.outcome == TouchOutcome::ExtendDown) {
                endpoints[i] = next;
                s.extension += cfg_.lowering_increment;
                ++s.extend_count;
            }
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace hexapod
